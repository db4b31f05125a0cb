#pragma once

#include "precision.hpp"

#include <boost/multiprecision/complex128.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

/// @brief Special functions: complex log-gamma, Bessel functions of imaginary and complex order,
/// Whittaker functions, the ball multiplier and the triple-product weight.
namespace dihedral::special {

/// @brief Thrown when an argument hits a pole.
struct pole_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// @brief log Γ(s), continued analytically from the positive reals (cut along (-∞, 0]).
/// Works for std::complex<double> and Boost multiprecision complex types.
template <class C>
C log_gamma(C s) {
    using std::real;
    using std::imag;
    using std::log;
    using R = std::decay_t<decltype(real(s))>;
    const R re = real(s), im = imag(s);
    if (im == 0 && re <= 0) {
        using std::floor;
        if (re == floor(re)) throw pole_error("log_gamma: pole at a nonpositive integer");
    }
    const int digits = std::numeric_limits<R>::digits10;
    const R N = R(digits < 20 ? 10 : digits + 10);
    // shift into the Stirling region; the branch is tracked through the summed arguments
    C prod(R(1));
    R arg_sum(0);
    C z = s;
    using std::abs;
    using std::arg;
    while (real(z) < R(1) / 2 || abs(z) < N) {
        prod *= z;
        arg_sum += arg(z);
        z += R(1);
    }
    C shift_sum(log(abs(prod)), arg_sum);
    const R half(R(1) / 2);
    const R two_pi = 2 * boost::math::constants::pi<R>();
    C out = (z - half) * log(z) - z + half * log(two_pi);
    C zinv = C(R(1)) / z, zinv2 = zinv * zinv, pw = zinv;
    const R eps = std::numeric_limits<R>::epsilon();
    for (int k = 1; k < 200; ++k) {
        R b = boost::math::bernoulli_b2n<R>(k);
        C term = pw * (b / R((2 * k) * (2 * k - 1)));
        out += term;
        using std::abs;
        if (abs(term) < eps * abs(out)) break;
        pw *= zinv2;
    }
    return out - shift_sum;
}

inline cplx lgamma_c(cplx s) { return log_gamma(s); }

inline cplx gamma_c(cplx s) { return std::exp(log_gamma(s)); }

/// @brief log Γ_R(s) = -(s/2) log π + log Γ(s/2).
inline cplx log_gamma_R(cplx s) { return -0.5 * s * std::log(kPi) + log_gamma(0.5 * s); }

inline cplx gamma_R(cplx s) { return std::exp(log_gamma_R(s)); }

namespace detail {

inline double k_series_scaled(double t, double x) {
    // e^{πt/2} K_{it}(x) = -2π Im(S e^{-πt/2}) / (1 - e^{-2πt}),  S = Σ (x/2)^{2k+it}/(k! Γ(k+1+it))
    cplx lead = std::exp(cplx(0, t * std::log(x / 2)) - log_gamma(cplx(1, t)) - kPi * t / 2);
    cplx term = lead, sum = lead;
    double q = x * x / 4;
    for (int k = 1; k < 200; ++k) {
        term *= q / (double(k) * cplx(k, t));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return -2 * kPi * sum.imag() / (-std::expm1(-2 * kPi * t));
}

inline double k_contour_scaled(double t, double x) {
    const double pi2 = kPi / 2;
    double delta = t < x ? std::asin(t / x) : pi2;
    if (t > 0) delta = std::min(delta, pi2 - 1.0 / t);
    delta = std::max(delta, 0.0);
    const double d = pi2 - delta;
    const double cd = std::cos(delta), sd = std::sin(delta);
    const double h = kPi * d / (40 + t * d / 2);
    const double wmax = std::acosh(1 + 45 / (x * cd));
    const double pre = kPi * t / 2 - t * delta;
    auto f = [&](double w) {
        return std::exp(pre - x * cd * std::cosh(w)) * std::cos(t * w - x * sd * std::sinh(w));
    };
    double s = 0.5 * f(0);
    const long n = static_cast<long>(wmax / h) + 1;
    for (long j = 1; j <= n; ++j) s += f(j * h);
    return h * s;
}

} // namespace detail

/// @brief Scaled K-Bessel of imaginary order, e^{πt/2} K_{it}(x).
inline double bessel_k_im(double t, double x) {
    if (!(x > 0)) throw std::domain_error("bessel_k_im: x must be positive");
    if (std::abs(t) > 100 || x > 1e5) throw std::range_error("bessel_k_im: outside supported (t, x) box");
    if (t < 0) return std::exp(-kPi * std::abs(t)) * bessel_k_im(-t, x);
    if (t == 0) return x < 700 ? boost::math::cyl_bessel_k(0.0, x) : 0.0;
    if (x < 0.05) return detail::k_series_scaled(t, x);
    return detail::k_contour_scaled(t, x);
}

/// @brief Unscaled K_{it}(x).
inline double bessel_k_im_unscaled(double t, double x) {
    return std::exp(-kPi * std::abs(t) / 2) * bessel_k_im(std::abs(t), x);
}

/// @brief Scaled Whittaker function e^{πt/2} W_{0,it}(y) = √(y/π) e^{πt/2} K_{it}(y/2).
inline double whittaker_w0(double t, double y) {
    if (!(y > 0)) throw std::domain_error("whittaker_w0: y must be positive");
    return std::sqrt(y / kPi) * bessel_k_im(t, y / 2);
}

/// @brief Piecewise Chebyshev interpolant of x ↦ e^{πt/2} K_{it}(x) in log x.
class KBesselTable {
public:
    KBesselTable() = default;
    KBesselTable(double t, double xmin, double tol = 1e-14) : t_(std::abs(t)) {
        if (!(xmin > 0)) throw std::domain_error("KBesselTable: xmin must be positive");
        // cutoff where the scaled value is negligible
        double x = std::max(t_, 1.0);
        peak_ = 0;
        for (double z = xmin; z < x; z *= 1.3) peak_ = std::max(peak_, std::abs(bessel_k_im(t_, z)));
        while (std::abs(bessel_k_im(t_, x)) > 1e-22 * std::max(peak_, 1e-300) && x < 1e5) x *= 1.1;
        xmax_ = x;
        tol_ = tol;
        build(std::log(xmin), std::log(xmax_), 0);
        std::sort(panels_.begin(), panels_.end(), [](const Panel& a, const Panel& b) { return a.a < b.a; });
    }

    double xmax() const { return xmax_; }
    double t() const { return t_; }
    std::size_t panels() const { return panels_.size(); }

    double operator()(double x) const {
        if (x >= xmax_) return 0.0;
        double u = std::log(x);
        if (panels_.empty() || u < panels_.front().a) return bessel_k_im(t_, x);
        auto it = std::upper_bound(panels_.begin(), panels_.end(), u,
                                   [](double v, const Panel& p) { return v < p.a; });
        const Panel& p = *(it - 1);
        double y = (2 * u - p.a - p.b) / (p.b - p.a);
        double b1 = 0, b2 = 0;
        for (int k = kDeg; k >= 1; --k) {
            double b0 = 2 * y * b1 - b2 + p.c[k];
            b2 = b1;
            b1 = b0;
        }
        return y * b1 - b2 + p.c[0];
    }

private:
    static constexpr int kDeg = 24;
    struct Panel {
        double a, b;
        double c[kDeg + 1];
    };

    void build(double a, double b, int depth) {
        Panel p{a, b, {}};
        double f[kDeg + 1];
        double fmax = 0;
        for (int j = 0; j <= kDeg; ++j) {
            double y = std::cos(kPi * (j + 0.5) / (kDeg + 1));
            f[j] = bessel_k_im(t_, std::exp(0.5 * (a + b) + 0.5 * (b - a) * y));
            fmax = std::max(fmax, std::abs(f[j]));
        }
        for (int k = 0; k <= kDeg; ++k) {
            double s = 0;
            for (int j = 0; j <= kDeg; ++j) s += f[j] * std::cos(kPi * k * (j + 0.5) / (kDeg + 1));
            p.c[k] = s * (k == 0 ? 1.0 : 2.0) / (kDeg + 1);
        }
        double tail = std::abs(p.c[kDeg]) + std::abs(p.c[kDeg - 1]) + std::abs(p.c[kDeg - 2]);
        double scale = std::max(fmax, 1e-8 * peak_);
        if (tail > tol_ * scale && depth < 40) {
            double m = 0.5 * (a + b);
            build(a, m, depth + 1);
            build(m, b, depth + 1);
            return;
        }
        panels_.push_back(p);
    }

    double t_ = 0, xmax_ = 0, peak_ = 1, tol_ = 1e-14;
    std::vector<Panel> panels_;
};

/// @brief K_ν(x) for complex order ν and x > 0 via ∫₀^∞ e^{-x cosh u} cosh(νu) du.
inline cplx bessel_k(cplx nu, double x) {
    if (!(x > 0)) throw std::domain_error("bessel_k: x must be positive");
    const double ar = std::abs(nu.real()), ai = std::abs(nu.imag());
    const double h = std::min(0.05, 0.5 / (1 + ai));
    cplx s = 0.5;
    double logmax = -x;
    for (long j = 1;; ++j) {
        double u = j * h;
        double e = -x * std::cosh(u) + ar * u;
        logmax = std::max(logmax, e);
        if (e < logmax - 45 && x * std::cosh(u) > ar) break;
        s += std::exp(-x * (std::cosh(u) - 1)) * std::cosh(nu * u);
        if (j > 2000000) throw std::runtime_error("bessel_k: no convergence");
    }
    return h * s * std::exp(-x);
}

namespace detail {

/// Σ_k (−z²/4)^k / (k! (ν+1)_k), the J series without its prefactor.
template <class CT>
CT j_series_sum(const CT& nu, const CT& z, double tol) {
    using std::abs;
    CT term(1), sum(1), q = -(z * z) / CT(4);
    for (int k = 1; k < 4000; ++k) {
        term *= q / (CT(k) * (nu + CT(k)));
        sum += term;
        if (abs(term) < tol * abs(sum) && k > abs(z)) break;
    }
    return sum;
}

template <class CT>
CT j_series(const CT& nu, const CT& z) {
    using std::exp;
    using std::log;
    return exp(nu * log(z / CT(2)) - log_gamma(nu + CT(1))) * j_series_sum(nu, z, 1e-40);
}

/// Σ_m (±i)^m a_m(ν)/z^m of the Hankel expansions.
inline cplx hankel_sum(cplx nu, cplx z, int sign) {
    cplx mu = 4.0 * nu * nu;
    cplx term = 1.0, sum = 1.0;
    double prev = 1e300;
    for (int m = 1; m < 200; ++m) {
        term *= (mu - double((2 * m - 1) * (2 * m - 1))) / (8.0 * m * z) * cplx(0, sign);
        double a = std::abs(term);
        if (a > prev) break;
        sum += term;
        prev = a;
        if (a < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

} // namespace detail

/// @brief Hankel H^{(1)} (sign = +1) or H^{(2)} (sign = -1) by the large-argument expansion.
inline cplx hankel_asymptotic(cplx nu, cplx z, int sign) {
    cplx phase = z - nu * (kPi / 2) - kPi / 4;
    return std::sqrt(2.0 / (kPi * z)) * std::exp(cplx(0, sign) * phase) * detail::hankel_sum(nu, z, sign);
}

/// @brief Argument beyond which the Hankel expansion is used for J_ν.
inline double bessel_j_asymptotic_threshold(cplx nu) { return std::max(40.0, 0.5 * std::norm(nu) + 20.0); }

/// @brief J_ν(x) for complex order ν and x > 0.
inline cplx bessel_j(cplx nu, double x) {
    if (!(x > 0)) throw std::domain_error("bessel_j: x must be positive");
    if (nu.imag() == 0 && nu.real() >= 0) return boost::math::cyl_bessel_j(nu.real(), x);
    double thr = bessel_j_asymptotic_threshold(nu);
    if (x > thr) return 0.5 * (hankel_asymptotic(nu, x, 1) + hankel_asymptotic(nu, x, -1));
    if (x <= 40) {
        // prefactor in double; only the alternating sum needs extra digits
        cplx pre = std::exp(nu * std::log(x / 2) - lgamma_c(nu + 1.0));
        if (x <= 8) return pre * detail::j_series_sum(nu, cplx(x), 1e-18);
        using C128 = boost::multiprecision::complex128;
        C128 v = detail::j_series_sum(C128(nu.real(), nu.imag()), C128(x, 0), 1e-30);
        return pre * cplx(v.real().convert_to<double>(), v.imag().convert_to<double>());
    }
    if (x > 160) throw std::range_error("bessel_j: argument beyond supported range for this order");
    using C100 = boost::multiprecision::cpp_complex<100>;
    C100 v = detail::j_series(C100(nu.real(), nu.imag()), C100(x, 0));
    return {v.real().convert_to<double>(), v.imag().convert_to<double>()};
}

/// @brief Ball multiplier h_R(t) for t real or t ∈ i(0, 1/2); real-valued.
inline double ball_multiplier(double R, cplx t) {
    if (!(R > 0)) throw std::domain_error("ball_multiplier: R must be positive");
    if (t.real() != 0 && t.imag() != 0) throw std::domain_error("ball_multiplier: t must be real or imaginary");
    const double shR = std::sinh(R / 2);
    // r = sin θ removes the square-root endpoint behaviour
    auto f = [&](double th) {
        double r = std::sin(th);
        double q = std::sinh(R * r / 2) / shR;
        double w = std::sqrt(std::max(0.0, 1 - q * q)) * std::cos(th);
        double osc = t.imag() == 0 ? std::cos(R * r * t.real()) : std::cosh(R * r * t.imag());
        return w * osc;
    };
    double freq = R * std::abs(t);
    int panels = 4 + static_cast<int>(freq);
    double s = 0, a = 0, step = (kPi / 2) / panels;
    for (int i = 0; i < panels; ++i, a += step)
        s += boost::math::quadrature::gauss<double, 30>::integrate(f, a, a + step);
    return 2 * R / (kPi * shR) * s;
}

/// @brief The Γ-ratio weight H(t) attached to a dihedral form with parameter t_g.
inline double weight_H(cplx t, double tg) {
    const cplx i(0, 1);
    auto near_pole = [](cplx a) {
        double n = std::round(a.real());
        return n <= 0 && std::abs(a - n) < 1e-9;
    };
    cplx args[4] = {0.25 + i * (2 * tg + t) / 2.0, 0.25 + i * (2 * tg - t) / 2.0,
                    0.25 - i * (2 * tg + t) / 2.0, 0.25 - i * (2 * tg - t) / 2.0};
    for (auto& a : args)
        if (near_pole(a)) throw pole_error("weight_H: too close to a pole at ±2t_g ± i/2");
    cplx lg = 0;
    for (auto& a : args) lg += log_gamma(a);
    lg -= 2.0 * (log_gamma(cplx(0.5, tg)) + log_gamma(cplx(0.5, -tg)));
    lg += 2.0 * (log_gamma(0.25 + i * t / 2.0) + log_gamma(0.25 - i * t / 2.0));
    lg -= log_gamma(0.5 + i * t) + log_gamma(0.5 - i * t);
    return std::exp(lg).real();
}

/// @brief Stirling form 8π e^{-πΩ} / ((1+|t|)(1+|2t_g+t|)^{1/2}(1+|2t_g-t|)^{1/2}) for real t.
inline double weight_H_stirling(double t, double tg) {
    double om = std::abs(t) <= 2 * tg ? 0.0 : std::abs(t) - 2 * tg;
    return 8 * kPi * std::exp(-kPi * om) /
           ((1 + std::abs(t)) * std::sqrt(1 + std::abs(2 * tg + t)) * std::sqrt(1 + std::abs(2 * tg - t)));
}

/// @brief ∫_{-T}^{T} (1/2π²) r tanh(πr) dr.
inline double spectral_measure_mass(double T) {
    if (!(T > 0)) throw std::domain_error("spectral_measure_mass: T must be positive");
    // r tanh(πr) = r - 2r/(e^{2πr}+1)
    auto corr = [](double r) { return 2 * r / (std::exp(2 * kPi * r) + 1); };
    double c = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(corr, 0.0, std::min(T, 20.0), 15, 1e-15);
    return (T * T / 2 - c) / (kPi * kPi);
}

} // namespace dihedral::special
