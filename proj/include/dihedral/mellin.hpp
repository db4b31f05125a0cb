#pragma once

#include "special.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

/// @brief The Bessel kernels 𝒥_r^±, 𝒥_k^hol and their Mellin transforms.
namespace dihedral::mellin {

enum class Kind { plus, minus, hol };

/// @brief Kernel identifier: spectral order r for kinds ±, even weight k for hol.
struct MellinKernelId {
    Kind kind = Kind::minus;
    double r = 0;
    int k = 2;

    static MellinKernelId plus(double r) { return {Kind::plus, r, 0}; }
    static MellinKernelId minus(double r) { return {Kind::minus, r, 0}; }
    static MellinKernelId hol(int k) {
        if (k < 2 || k % 2) throw std::invalid_argument("MellinKernelId: hol kernel needs even k >= 2");
        return {Kind::hol, 0, k};
    }
};

inline std::string to_string(Kind k) { return k == Kind::plus ? "plus" : (k == Kind::minus ? "minus" : "hol"); }

/// @brief Kernel value 𝒥(x) at x > 0.
inline double kernel_value(const MellinKernelId& id, double x) {
    const double z = 4 * kPi * x;
    switch (id.kind) {
    case Kind::minus: {
        double r = std::abs(id.r);
        return 4 * std::cosh(kPi * r) * std::exp(-kPi * r) * special::bessel_k_im(2 * r, z);
    }
    case Kind::plus: {
        double r = std::abs(id.r);
        if (r == 0) return -2 * kPi * boost::math::cyl_neumann(0, z);
        return -2 * kPi * special::bessel_j(cplx(0, 2 * r), z).imag() / std::sinh(kPi * r);
    }
    case Kind::hol:
        return 2 * kPi * ((id.k / 2) % 2 ? -1.0 : 1.0) * boost::math::cyl_bessel_j(id.k - 1, z);
    }
    return 0;
}

/// @brief Poles nearest the origin: s = 2(±ir − n) for kinds ±, s = 1 − k − 2n for hol.
inline cplx pole(const MellinKernelId& id, int n, int sign = 1) {
    if (id.kind == Kind::hol) return double(1 - id.k - 2 * n);
    return 2.0 * cplx(-n, sign * id.r);
}

/// @brief Closed-form Mellin transform ∫₀^∞ 𝒥(x) x^{s−1} dx.
inline cplx mellin_J(const MellinKernelId& id, cplx s) {
    using special::lgamma_c;
    const cplx i(0, 1);
    const double r = id.r;
    for (int n = 0; n < 400; ++n) {
        bool hit = id.kind == Kind::hol ? std::abs(s - pole(id, n)) < 1e-10
                                        : (std::abs(s - pole(id, n, 1)) < 1e-10 || std::abs(s - pole(id, n, -1)) < 1e-10);
        if (hit) throw special::pole_error("mellin_J: s is a pole of the kernel transform");
    }
    cplx l2pi = -s * std::log(2 * kPi);
    switch (id.kind) {
    case Kind::plus:
        return std::exp(l2pi + lgamma_c(s / 2.0 + i * r) + lgamma_c(s / 2.0 - i * r)) * std::cos(kPi * s / 2.0);
    case Kind::minus:
        return std::exp(l2pi + lgamma_c(s / 2.0 + i * r) + lgamma_c(s / 2.0 - i * r)) * std::cosh(kPi * r);
    case Kind::hol: {
        double ik = (id.k / 2) % 2 ? -1.0 : 1.0; // i^{-k}
        cplx den = 0.5 * (1.0 - s + double(id.k));
        if (std::abs(den - std::round(den.real())) < 1e-12 && std::round(den.real()) <= 0) return 0.0;
        return kPi * ik * std::exp(l2pi + lgamma_c((s + double(id.k - 1)) / 2.0) - lgamma_c(den));
    }
    }
    return 0;
}

/// @brief Residue of mellin_J at pole(id, n, sign) from the closed-form Laurent expansion.
inline cplx mellin_residue(const MellinKernelId& id, int n, int sign = 1) {
    using special::lgamma_c;
    const cplx i(0, 1);
    cplx s0 = pole(id, n, sign);
    double fact = std::tgamma(n + 1.0);
    if (id.kind == Kind::hol) {
        // (2πi)^{k+2n} / (Γ(k+n) Γ(n+1))
        cplx v = std::pow(cplx(0, 2 * kPi), id.k + 2 * n);
        return v / (std::tgamma(double(id.k + n)) * fact);
    }
    // Γ(s/2 ± ir) near −n contributes 2(−1)^n/n!; the companion factor is Γ(−n ∓ 2ir)
    cplx other = std::exp(lgamma_c(cplx(-n, sign * 2 * id.r)));
    cplx base = std::exp(-s0 * std::log(2 * kPi)) * (n % 2 ? -2.0 : 2.0) / fact * other;
    if (id.kind == Kind::minus) return base * std::cosh(kPi * id.r);
    return base * std::cos(kPi * s0 / 2.0);
}

/// @brief Residue extracted numerically by the trapezoid rule on a small circle.
inline cplx contour_residue(const std::function<cplx(cplx)>& f, cplx s0, double rho, int m = 256) {
    cplx acc = 0;
    for (int j = 0; j < m; ++j) {
        cplx e = std::exp(cplx(0, 2 * kPi * j / m));
        acc += f(s0 + rho * e) * rho * e;
    }
    return acc / double(m);
}

namespace detail {

using GL = boost::math::quadrature::gauss<double, 20>;

inline cplx gl_panel(const std::function<cplx(double)>& f, double a, double b) {
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    // 20-point rule: boost stores the 10 positive nodes only
    cplx s = 0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * (f(c + h * x[j]) + f(c - h * x[j]));
    return s * h;
}

inline cplx gl_composite(const std::function<cplx(double)>& f, double a, double b, double width) {
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    double h = (b - a) / n;
    cplx s = 0;
    for (int i = 0; i < n; ++i) s += gl_panel(f, a + i * h, a + (i + 1) * h);
    return s;
}

/// ∫₀^{x0} x^{s−1} (2πx)^{2k+ν} Σ coefficients, termwise.
inline cplx power_head(cplx nu, cplx s, double x0, int sign_alt) {
    cplx sum = 0;
    for (int k = 0; k < 80; ++k) {
        cplx e = 2.0 * double(k) + nu;
        cplx lc = e * std::log(2 * kPi) - special::lgamma_c(k + 1.0) - special::lgamma_c(double(k) + nu + 1.0) +
                  (s + e) * std::log(x0);
        cplx term = std::exp(lc) / (s + e);
        if (sign_alt && k % 2) term = -term;
        sum += term;
        if (k > 3 && std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

/// ∫₀^∞ J_ν(4πx) x^{s−1} dx by series head, quadrature body and rotated Hankel tail.
inline cplx mellin_bessel_j_numeric(cplx nu, cplx s) {
    const double x0 = 0.05;
    const double X = special::bessel_j_asymptotic_threshold(nu) / (4 * kPi);
    cplx head = power_head(nu, s, x0, 1);
    auto jv = [&](double x) {
        return (nu.imag() == 0) ? cplx(boost::math::cyl_bessel_j(nu.real(), 4 * kPi * x))
                                : special::bessel_j(nu, 4 * kPi * x);
    };
    double freq = 2 * std::abs(nu.imag()) + std::abs(s.imag()) + 1;
    auto fu = [&](double u) {
        double x = std::exp(u);
        return jv(x) * std::exp(s * u);
    };
    cplx body = gl_composite(fu, std::log(x0), 0.0, 0.3 / freq);
    auto fx = [&](double x) { return jv(x) * std::pow(cplx(x), s - 1.0); };
    body += gl_composite(fx, 1.0, X, 0.1);
    // tail: J = (H1 + H2)/2, each rotated into its decaying half plane
    auto t1 = [&](double y) {
        cplx x(X, y);
        return cplx(0, 1) * std::pow(x, s - 1.0) * special::hankel_asymptotic(nu, 4 * kPi * x, 1);
    };
    auto t2 = [&](double y) {
        cplx x(X, -y);
        return cplx(0, -1) * std::pow(x, s - 1.0) * special::hankel_asymptotic(nu, 4 * kPi * x, -1);
    };
    cplx tail = 0.5 * (gl_composite(t1, 0.0, 3.5, 0.1) + gl_composite(t2, 0.0, 3.5, 0.1));
    return head + body + tail;
}

/// ∫₀^∞ K_{2ir}(4πx) x^{s−1} dx by series head and quadrature body.
inline cplx mellin_bessel_k_numeric(double r, cplx s) {
    if (r == 0) throw std::domain_error("mellin_bessel_k_numeric: needs r != 0");
    const double x0 = 0.05;
    cplx nu(0, 2 * r);
    // K_ν = (π/2)(I_{−ν} − I_ν)/sin(νπ)
    cplx head = (kPi / 2.0) * (power_head(-nu, s, x0, 0) - power_head(nu, s, x0, 0)) / std::sin(nu * kPi);
    double scale = std::exp(-kPi * r);
    double freq = 2 * r + std::abs(s.imag()) + 1;
    auto fu = [&](double u) {
        double x = std::exp(u);
        return scale * special::bessel_k_im(2 * r, 4 * kPi * x) * std::exp(s * u);
    };
    cplx body = gl_composite(fu, std::log(x0), 0.0, 0.3 / freq);
    auto fx = [&](double x) { return scale * special::bessel_k_im(2 * r, 4 * kPi * x) * std::pow(cplx(x), s - 1.0); };
    body += gl_composite(fx, 1.0, 4.5, 0.1);
    return head + body;
}

} // namespace detail

/// @brief Direct numerical Mellin transform of the kernel (valid on the convergence strip).
inline cplx mellin_J_numeric(const MellinKernelId& id, cplx s) {
    const cplx i(0, 1);
    switch (id.kind) {
    case Kind::minus:
        return 4 * std::cosh(kPi * id.r) * detail::mellin_bessel_k_numeric(std::abs(id.r), s);
    case Kind::plus: {
        double r = id.r;
        cplx a = detail::mellin_bessel_j_numeric(cplx(0, 2 * r), s);
        cplx b = detail::mellin_bessel_j_numeric(cplx(0, -2 * r), s);
        return kPi * i / std::sinh(kPi * r) * (a - b);
    }
    case Kind::hol: {
        double ik = (id.k / 2) % 2 ? -1.0 : 1.0;
        return 2 * kPi * ik * detail::mellin_bessel_j_numeric(double(id.k - 1), s);
    }
    }
    return 0;
}

} // namespace dihedral::mellin
