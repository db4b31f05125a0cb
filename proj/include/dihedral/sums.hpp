#pragma once

#include "arith.hpp"
#include "dihedral.hpp"
#include "lfunc.hpp"
#include "mellin.hpp"
#include "special.hpp"

#include <boost/math/constants/constants.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

/// @brief Kloosterman, Gauß and Ramanujan sums, Voronoĭ summation and Kuznetsov kernel transforms.
namespace dihedral::sums {

using arith::i64;

/// @brief Compensated (Kahan) accumulator.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0, c_ = 0;
};

/// @brief Compensated complex accumulator.
class KahanComplex {
public:
    void add(cplx z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_, im_;
};

namespace detail {

inline i64 mulmod_signed(i64 a, i64 b, i64 m) {
    return arith::mod(static_cast<i64>((static_cast<__int128>(arith::mod(a, m)) * arith::mod(b, m)) % m), m);
}

/// e(k/c) from the reduced residue k.
inline cplx unit_root(i64 k, i64 c) {
    double t = 2 * kPi * static_cast<double>(arith::mod(k, c)) / static_cast<double>(c);
    return {std::cos(t), std::sin(t)};
}

} // namespace detail

/// @brief S(m, n; c) = Σ_{d ∈ (Z/c)^×} e((md + n d̄)/c), real by the d ↔ d̄ pairing.
inline double kloosterman(i64 m, i64 n, i64 c) {
    if (c < 1) throw std::invalid_argument("kloosterman: c must be positive");
    if (c == 1) return 1;
    KahanSum s;
    for (i64 d = 1; d < c; ++d) {
        if (std::gcd(d, c) != 1) continue;
        i64 k = arith::mod(detail::mulmod_signed(m, d, c) + detail::mulmod_signed(n, arith::inv_mod(d, c), c), c);
        s.add(std::cos(2 * kPi * static_cast<double>(k) / static_cast<double>(c)));
    }
    return s.value();
}

/// @brief Ramanujan sum c_c(n) = Σ_{a | (n, c)} a μ(c/a).
inline i64 ramanujan_sum(i64 n, i64 c) {
    if (c < 1) throw std::invalid_argument("ramanujan_sum: c must be positive");
    i64 g = std::gcd(arith::mod(n, c), c);
    if (g == 0) g = c;
    i64 s = 0;
    for (i64 a : arith::divisors(g)) s += a * arith::moebius(c / a);
    return s;
}

/// @brief Gauß sum τ(χ_D) of the Kronecker symbol: √D for D > 0, i√|D| for D < 0.
inline cplx gauss_sum(i64 D) {
    if (D == 1) return 1.0;
    return D > 0 ? cplx(std::sqrt(double(D)), 0) : cplx(0, std::sqrt(double(-D)));
}

/// @brief Brute-force twisted Gauß sum Σ_{d mod c} χ_D(d) e(md/c).
inline cplx twisted_gauss_sum(i64 D, i64 c, i64 m) {
    KahanComplex s;
    for (i64 d = 1; d <= c; ++d) {
        if (std::gcd(d, c) != 1) continue;
        int x = arith::kronecker(D, d);
        if (x) s.add(double(x) * detail::unit_root(detail::mulmod_signed(m, d, c), c));
    }
    return s.value();
}

/// @brief Both sides of the Miyake identity for χ_D and D | c: (brute force, divisor formula).
inline std::pair<cplx, cplx> gauss_miyake_check(i64 D, i64 c, i64 m) {
    if (D == 1 || c < 1 || c % std::abs(D) != 0) throw std::invalid_argument("gauss_miyake_check: needs D != 1 and D | c");
    const i64 q = std::abs(D);
    cplx lhs = twisted_gauss_sum(D, c, m);
    i64 g = std::gcd(c / q, std::abs(m));
    KahanSum r;
    for (i64 a : arith::divisors(g)) {
        i64 b = c / (a * q);
        int chi_b = arith::kronecker(D, b), chi_m = arith::kronecker(D, m / a);
        r.add(double(a * arith::moebius(b) * chi_b * chi_m));
    }
    return {lhs, gauss_sum(D) * r.value()};
}

// ---------------------------------------------------------------------------
// Voronoĭ summation

/// @brief One side of a Voronoĭ identity.
struct VoronoiSide {
    cplx value = 0;
    double truncation_error = 0;
    long long terms_used = 0;

    nlohmann::json to_json() const {
        return {{"re", value.real()}, {"im", value.imag()}, {"truncation_error", truncation_error}, {"terms_used", terms_used}};
    }
};

/// @brief φ(x) = exp(−(x − center)² / (2 width²)).
struct GaussianParams {
    double center = 100;
    double width = 10;

    double operator()(double x) const {
        double u = (x - center) / width;
        return std::exp(-0.5 * u * u);
    }
};

enum class VoronoiKind { eisenstein_newform, dihedral };

/// @brief Coefficient source: E_{χ_D,1} (D = 1 gives the divisor function) or an even dihedral form.
struct VoronoiSeries {
    VoronoiKind kind = VoronoiKind::eisenstein_newform;
    i64 D = 1;
    double t = 0;
    std::function<double(i64)> lambda;

    static VoronoiSeries eisenstein(i64 D) {
        if (D < 1 || (D > 1 && (arith::mod(D, 4) != 1 || !arith::is_squarefree(D))))
            throw std::invalid_argument("VoronoiSeries: needs D = 1 or squarefree D = 1 mod 4");
        VoronoiSeries v;
        v.D = D;
        v.lambda = [D](i64 n) { return lfunc::lambda_chi1(D, n, 0).real(); };
        return v;
    }

    /// The form must outlive the series.
    static VoronoiSeries dihedral(const DihedralForm& g) {
        if (g.parity() != 1) throw std::invalid_argument("VoronoiSeries: dihedral form must be even");
        VoronoiSeries v;
        v.kind = VoronoiKind::dihedral;
        v.D = g.level();
        v.t = g.t();
        v.lambda = [&g](i64 n) { return g.lambda(n); };
        return v;
    }

    int chi(i64 n) const { return D == 1 ? 1 : arith::kronecker(D, n); }
};

struct VoronoiOptions {
    double tail_sigmas = 10;   // Gaussian cut-off in units of width
    double eps = 1e-15;        // relative size below which contour and dual terms are dropped
    double panel = 0.5;        // contour panel length in τ
};

namespace detail {

using GL20 = boost::math::quadrature::gauss<double, 20>;

template <class F>
void gl_nodes(double a, double b, int panels, F&& f) {
    const auto& x = GL20::abscissa();
    const auto& w = GL20::weights();
    double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        double c = a + (i + 0.5) * h, r = 0.5 * h;
        for (std::size_t j = 0; j < x.size(); ++j) {
            f(c + r * x[j], w[j] * r);
            if (x[j] != 0) f(c - r * x[j], w[j] * r);
        }
    }
}

/// Gaussian restricted to [lo, hi] on a fixed node set, reused for every Mellin evaluation.
class GaussianMellin {
public:
    GaussianMellin(const GaussianParams& p, double K, double tau_max) {
        lo_ = p.center - K * p.width;
        hi_ = p.center + K * p.width;
        // uniform in log x, so x^{iτ} has constant frequency
        const double U = std::log(hi_ / lo_);
        int panels = static_cast<int>(std::ceil(tau_max * U / 2.5 + U * hi_ / (1.5 * p.width))) + 1;
        gl_nodes(std::log(lo_), std::log(hi_), panels, [&](double u, double w) {
            double x = std::exp(u);
            logx_.push_back(u);
            wphi_.push_back(w * x * p(x));
        });
    }

    /// ∫ φ(x) x^{s−1} dx and ∫ φ(x) x^{s−1} log x dx
    std::pair<cplx, cplx> operator()(cplx s) const {
        cplx a = 0, b = 0;
        for (std::size_t i = 0; i < logx_.size(); ++i) {
            cplx v = wphi_[i] * std::exp((s - 1.0) * logx_[i]);
            a += v;
            b += v * logx_[i];
        }
        return {a, b};
    }

private:
    double lo_, hi_;
    std::vector<double> logx_, wphi_;
};

} // namespace detail

/// @brief Direct side Σ λ(n) e(nd/c) φ(n) over the Gaussian window.
inline VoronoiSide voronoi_direct(const VoronoiSeries& L, i64 d, i64 c, const GaussianParams& phi,
                                  const VoronoiOptions& o = {}) {
    const double K = o.tail_sigmas;
    i64 lo = std::max<i64>(1, static_cast<i64>(std::floor(phi.center - K * phi.width)));
    i64 hi = static_cast<i64>(std::ceil(phi.center + K * phi.width));
    KahanComplex s;
    VoronoiSide out;
    for (i64 n = lo; n <= hi; ++n) {
        double lam = L.lambda(n);
        if (lam == 0) continue;
        s.add(lam * phi(double(n)) * detail::unit_root(detail::mulmod_signed(n, d, c), c));
        ++out.terms_used;
    }
    out.value = s.value();
    // |λ(n)| ≤ d(n) ≤ 2√n on the two omitted tails
    double edge = std::exp(-0.5 * K * K);
    out.truncation_error = 4 * std::sqrt(hi + phi.width) * (phi.width / K + 1) * edge + 1e-15 * out.terms_used;
    return out;
}

/// @brief Dual side: polar term plus Σ_± Σ_n λ(n) e(∓n h/c) Φ^±(n), the Φ^± by Mellin–Barnes quadrature.
inline VoronoiSide voronoi_dual(const VoronoiSeries& L, i64 d, i64 c, const GaussianParams& phi,
                                const VoronoiOptions& o = {}) {
    if (c < 1 || std::gcd(d, c) != 1) throw std::invalid_argument("voronoi: needs c >= 1 and gcd(d, c) = 1");
    if (!(phi.width > 0) || phi.center < 8 * phi.width)
        throw std::invalid_argument("voronoi: Gaussian needs width > 0 and center >= 8 width");
    const i64 q = L.D;
    const bool divisible = c % q == 0;
    if (!divisible && std::gcd(c, q) != 1) throw std::invalid_argument("voronoi: unsupported (c, level) divisibility pattern");

    const cplx tau = gauss_sum(q);
    cplx pref;
    double qpow;
    i64 h;
    if (divisible) {
        pref = 2.0 * double(L.chi(d));
        qpow = 1;
        h = arith::inv_mod(d, c);
    } else {
        pref = 2.0 * double(L.chi(-c)) * tau;
        if (L.kind == VoronoiKind::dihedral) pref /= L.lambda(q);
        qpow = double(q);
        h = arith::inv_mod(detail::mulmod_signed(d, q, c), c);
    }

    const double K = std::min(o.tail_sigmas, 0.9 * phi.center / phi.width);
    const double ratio = phi.center / phi.width;
    // |φ̂(1/2 + iτ)| ≈ √(2π) width center^{−1/2} e^{−τ² / (2 ratio²)}
    const double tau_max = ratio * std::sqrt(2 * std::log(1 / o.eps)) + 5;
    detail::GaussianMellin mel(phi, K, tau_max);

    VoronoiSide out;
    // polar term at s = 1
    auto [m1, dm1] = mel(1.0);
    cplx polar = 0;
    if (L.kind == VoronoiKind::eisenstein_newform) {
        if (q == 1) {
            const double gamma = boost::math::constants::euler<double>();
            polar = (dm1 + (2 * gamma - 2 * std::log(double(c))) * m1) / double(c);
        } else if (divisible) {
            polar = tau * double(L.chi(d)) * lfunc::dirichlet_L(1.0, q) / double(c) * m1;
        } else {
            polar = double(L.chi(c)) * lfunc::dirichlet_L(1.0, q) / double(c) * m1;
        }
    }

    // contour nodes on Re s = 1/2
    struct Node {
        cplx s, a_plus, a_minus;
    };
    std::vector<Node> nodes;
    const double sigma = 0.5;
    const double logc = std::log(double(c)), logq = std::log(qpow);
    double amax = 0;
    int panels = static_cast<int>(std::ceil(2 * tau_max / o.panel));
    auto kp = mellin::MellinKernelId::plus(L.t), km = mellin::MellinKernelId::minus(L.t);
    detail::gl_nodes(-tau_max, tau_max, panels, [&](double tau, double w) {
        cplx s(sigma, tau);
        cplx base = mel(s).first * std::exp((1.0 - 2.0 * s) * logc - s * logq) * (w / (2 * kPi));
        cplx w2 = 2.0 * (1.0 - s);
        Node nd{s, base * mellin::mellin_J(kp, w2), base * mellin::mellin_J(km, w2)};
        amax = std::max({amax, std::abs(nd.a_plus), std::abs(nd.a_minus)});
        nodes.push_back(nd);
    });
    nodes.erase(std::remove_if(nodes.begin(), nodes.end(),
                               [&](const Node& nd) { return std::abs(nd.a_plus) + std::abs(nd.a_minus) < o.eps * amax; }),
                nodes.end());
    // size of the integrand where the contour is cut, per unit τ
    double contour_cut = o.eps * amax;
    for (const auto& nd : nodes)
        if (std::abs(nd.s.imag()) > tau_max - o.panel)
            contour_cut = std::max(contour_cut, (std::abs(nd.a_plus) + std::abs(nd.a_minus)) * 20 / o.panel);

    // dual length: beyond n ≈ c² q center (K / 2π width)² both transforms are negligible
    const double kk = (K + 2) / (2 * kPi * phi.width);
    const i64 n_est = static_cast<i64>(std::ceil(double(c) * double(c) * qpow * phi.center * kk * kk)) + 20;
    KahanComplex dual;
    double node_abs = 0;
    for (const auto& nd : nodes) node_abs += std::abs(nd.a_plus) + std::abs(nd.a_minus);
    double last_block = 0, roundoff = 0;
    for (i64 n = 1; n <= n_est; ++n) {
        double lam = L.lambda(n);
        if (lam == 0) continue;
        double ln = std::log(double(n));
        cplx fp = 0, fm = 0;
        for (const auto& nd : nodes) {
            cplx ns = std::exp((nd.s - 1.0) * ln);
            fp += nd.a_plus * ns;
            fm += nd.a_minus * ns;
        }
        cplx e = detail::unit_root(detail::mulmod_signed(n, h, c), c);
        cplx term = lam * (fp * std::conj(e) + fm * e);
        dual.add(term);
        ++out.terms_used;
        roundoff += 1e-16 * std::abs(lam) * node_abs / std::sqrt(double(n));
        if (n > n_est - n_est / 10) last_block = std::max(last_block, std::abs(term));
    }
    out.value = polar + pref * dual.value();
    double tail_guess = last_block * double(n_est) / 10;
    // Σ_{n ≤ N} d(n) n^{−1/2} ≤ 2 √N (log N + 1)
    double dual_mass = 2 * std::sqrt(double(n_est)) * (std::log(double(n_est)) + 1);
    out.truncation_error = std::abs(pref) * (tail_guess + roundoff + contour_cut * dual_mass) +
                           phi.center * std::exp(-0.5 * K * K);
    return out;
}

/// @brief Both sides of the Voronoĭ identity for the fraction d/c and Gaussian test function φ.
inline std::pair<VoronoiSide, VoronoiSide> voronoi_both_sides(const VoronoiSeries& L, i64 d, i64 c,
                                                               const GaussianParams& phi, const VoronoiOptions& o = {}) {
    VoronoiSide rhs = voronoi_dual(L, d, c, phi, o);
    return {voronoi_direct(L, d, c, phi, o), rhs};
}

/// @brief Residue at s = 1 of L(s, E_{χ_D,1}, d/c), D > 1.
inline cplx eisenstein_voronoi_residue(i64 D, i64 d, i64 c) {
    if (D <= 1) throw std::invalid_argument("eisenstein_voronoi_residue: simple pole needs D > 1");
    cplx L1 = lfunc::dirichlet_L(1.0, D);
    if (c % D == 0) return gauss_sum(D) * double(arith::kronecker(D, d)) * L1 / double(c);
    if (std::gcd(c, D) == 1) return double(arith::kronecker(D, c)) * L1 / double(c);
    throw std::invalid_argument("eisenstein_voronoi_residue: unsupported (c, level) divisibility pattern");
}

// ---------------------------------------------------------------------------
// Kuznetsov kernel transforms

using mellin::Kind;

/// @brief Spectral measure density r tanh(πr) / (2π²).
inline double spec_density(double r) { return r * std::tanh(kPi * r) / (2 * kPi * kPi); }

namespace detail {

/// Last |r| where |h(r)| (1 + |r|)^3 is still significant; throws when that is unbounded.
inline double decay_radius(const std::function<double(double)>& h) {
    for (double r : {0.0, 0.5, 1.3, 2.7, 11.1}) {
        if (std::abs(h(r) - h(-r)) > 1e-12 * (1 + std::abs(h(r)))) throw std::invalid_argument("kuznetsov: h must be even");
    }
    std::vector<double> grid;
    for (double r = 0; r < 200; r += 0.125) grid.push_back(r);
    for (double r = 200; r <= 1e5; r *= 1.02) grid.push_back(r);
    double peak = 0;
    for (double r : grid) peak = std::max(peak, std::abs(h(r)));
    if (peak == 0) return 1;
    double last = 0;
    for (double r : grid)
        if (std::abs(h(r)) * std::pow(1 + r, 3) > 1e-17 * peak) last = r;
    if (last > 5e4) throw std::invalid_argument("kuznetsov: h fails decay test");
    return last + 1;
}

} // namespace detail

/// @brief (𝒦^± h)(x) = ∫ 𝒥_r^±(x) h(r) d_spec r by quadrature over r.
inline double kuznetsov_kernel_transform(Kind kind, const std::function<double(double)>& h, double x) {
    if (kind == Kind::hol) throw std::invalid_argument("kuznetsov_kernel_transform: kind must be plus or minus");
    if (!(x > 0)) throw std::invalid_argument("kuznetsov_kernel_transform: x must be positive");
    const double R = detail::decay_radius(h);
    const double z = 4 * kPi * x;
    // oscillation in r has frequency about 2 log(1 + 1/z) + 2
    double freq = 2 * std::abs(std::log(z / 2)) + 4;
    int panels = static_cast<int>(std::ceil(R * freq / 3)) + 4;
    KahanSum s;
    detail::gl_nodes(0, R, panels, [&](double r, double w) {
        if (r == 0) return;
        auto id = kind == Kind::plus ? mellin::MellinKernelId::plus(r) : mellin::MellinKernelId::minus(r);
        s.add(w * mellin::kernel_value(id, x) * h(r) * spec_density(r));
    });
    return 2 * s.value();
}

/// @brief Mellin transform of 𝒦^− h for 0 < Re s < 1 by the Gamma-ratio integral.
inline cplx kuznetsov_minus_mellin(const std::function<double(double)>& h, cplx s) {
    if (!(s.real() > 0 && s.real() < 1)) throw std::domain_error("kuznetsov_minus_mellin: needs 0 < Re s < 1");
    const double R = detail::decay_radius(h);
    const cplx i(0, 1);
    // Γ(s/2 + ir) has a pole at r = is/2, a distance Re(s)/2 from the path
    const cplx pole = i * s / 2.0;
    KahanComplex acc;
    auto f = [&](double r, double w) {
        cplx g = std::exp(special::lgamma_c(s / 2.0 + i * r) - special::lgamma_c(1.0 - s / 2.0 + i * r));
        acc.add(w * g * r * h(r));
    };
    std::function<void(double, double)> panel = [&](double a, double b) {
        double half = 0.5 * (b - a);
        if (half > 0.2 || half > 0.4 * std::abs(pole - 0.5 * (a + b))) {
            panel(a, a + half);
            panel(a + half, b);
        } else {
            detail::gl_nodes(a, b, 1, f);
        }
    };
    panel(-R, R);
    return i * std::exp(-(s + 1.0) * std::log(2 * kPi)) / std::cos(kPi * s / 2.0) * acc.value();
}

/// @brief (𝒦^− h)(x) by Mellin inversion on Re s = sigma.
inline double kuznetsov_minus_via_mellin(const std::function<double(double)>& h, double x, double sigma = 0.5) {
    if (!(x > 0)) throw std::invalid_argument("kuznetsov_minus_via_mellin: x must be positive");
    const double lx = std::log(x);
    KahanComplex acc;
    double peak = 0;
    // integrand is conjugate-symmetric in τ; integrate τ ≥ 0 panel by panel until negligible
    for (int k = 0;; ++k) {
        cplx part = 0;
        detail::gl_nodes(k * 1.0, (k + 1) * 1.0, 1, [&](double tau, double w) {
            cplx s(sigma, tau);
            part += w * kuznetsov_minus_mellin(h, s) * std::exp(-s * lx);
        });
        acc.add(part);
        peak = std::max(peak, std::abs(part));
        if (std::abs(part) < 1e-17 * peak && k > 4) break;
        if (k > 400) throw std::runtime_error("kuznetsov_minus_via_mellin: no convergence");
    }
    return acc.value().real() / kPi;
}

} // namespace dihedral::sums
