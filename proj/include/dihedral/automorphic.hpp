#pragma once

#include "arith.hpp"
#include "dihedral.hpp"
#include "lfunc.hpp"
#include "precision.hpp"
#include "special.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dihedral::automorphic {

/// @brief Point z = x + iy of the upper half-plane.
struct UpperHalfPoint {
    double x = 0;
    double y = 1;

    UpperHalfPoint() = default;
    UpperHalfPoint(double x_, double y_) : x(x_), y(y_) {
        if (!(y > 0)) throw std::domain_error("UpperHalfPoint: y must be positive");
    }
    explicit UpperHalfPoint(cplx z) : UpperHalfPoint(z.real(), z.imag()) {}
    cplx z() const { return {x, y}; }
};

/// @brief Integer 2×2 matrix acting by Möbius transformation.
struct Mat2 {
    long long a = 1, b = 0, c = 0, d = 1;

    long long det() const { return a * d - b * c; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    /// Inverse of a determinant-one matrix.
    Mat2 inverse() const { return {d, -b, -c, a}; }
    bool operator==(const Mat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }

    cplx apply(cplx z) const { return (double(a) * z + double(b)) / (double(c) * z + double(d)); }
    UpperHalfPoint apply(const UpperHalfPoint& p) const {
        cplx w = apply(p.z());
        // keep y exact in sign; det > 0 guarantees the upper half-plane
        double y = double(det()) * p.y / std::norm(double(c) * p.z() + double(d));
        return {w.real(), y};
    }
};

inline Mat2 translation(long long k) { return {1, k, 0, 1}; }
inline const Mat2 kS{0, -1, 1, 0};

/// @brief Right coset representatives of Γ₀(N) in SL₂(Z), indexed by P¹(Z/N).
struct CosetSystem {
    long long level = 1;
    std::vector<Mat2> reps;

    /// Index j with α_j γ ∈ Γ₀(N), i.e. γ⁻¹ ∈ Γ₀(N) α_j.
    std::size_t coset_of_inverse(const Mat2& gamma) const {
        for (std::size_t j = 0; j < reps.size(); ++j)
            if (arith::mod((reps[j] * gamma).c, level) == 0) return j;
        throw std::logic_error("CosetSystem: no coset found");
    }
};

/// @brief Builds ν(N) representatives; the identity comes first and the rest have the form S T^k where possible.
inline CosetSystem coset_system(long long N) {
    if (N < 1) throw std::invalid_argument("coset_system: level must be positive");
    CosetSystem cs{N, {Mat2{}}};
    auto known = [&](const Mat2& m) {
        for (const auto& r : cs.reps)
            if (arith::mod((r * m.inverse()).c, N) == 0) return true;
        return false;
    };
    for (long long j = 0; j < N; ++j) {
        long long k = j <= N / 2 ? j : j - N; // centred translates stay away from the real axis
        Mat2 m = kS * translation(k);
        if (!known(m)) cs.reps.push_back(m);
    }
    // remaining classes (c : d) with 1 < gcd(c, N) < N
    for (long long c = 2; c < N; ++c) {
        if (std::gcd(c, N) == 1) continue;
        for (long long d = 1; d <= N * N && (long long)cs.reps.size() < arith::nu(N); ++d) {
            if (std::gcd(c, d) != 1) continue;
            arith::i64 x, y;
            arith::ext_gcd(d, c, x, y); // d x + c y = 1
            Mat2 m{x, -y, c, d};
            if (!known(m)) cs.reps.push_back(m);
        }
    }
    if ((long long)cs.reps.size() != arith::nu(N)) throw std::logic_error("coset_system: enumeration incomplete");
    return cs;
}

/// @brief Reduction into the standard SL₂(Z) domain: returns σ with σz ∈ F.
inline Mat2 sl2_reduce(UpperHalfPoint& p) {
    const UpperHalfPoint orig = p;
    Mat2 s{};
    cplx z = p.z();
    for (int it = 0; it < 10000; ++it) {
        long long k = static_cast<long long>(std::floor(z.real() + 0.5));
        if (k != 0) {
            z -= double(k);
            s = translation(-k) * s;
        }
        if (std::norm(z) < 1 - 1e-14) {
            z = -1.0 / z;
            s = kS * s;
        } else {
            break;
        }
    }
    p = s.apply(orig);
    return s;
}

/// @brief Result of reducing a point into ∪_j α_j F.
struct Reduction {
    UpperHalfPoint point;
    Mat2 gamma;         ///< element of Γ₀(N) with point = gamma · z
    std::size_t coset;  ///< index j of the translate α_j F containing point
};

inline Reduction reduce_point(const UpperHalfPoint& z, const CosetSystem& cs) {
    UpperHalfPoint w = z;
    Mat2 sigma = sl2_reduce(w);
    std::size_t j = cs.coset_of_inverse(sigma);
    Mat2 g = cs.reps[j] * sigma;
    if (g.a < 0 || (g.a == 0 && g.b < 0)) g = {-g.a, -g.b, -g.c, -g.d};
    return {g.apply(z), g, j};
}

inline Reduction reduce_point(const UpperHalfPoint& z, long long level) { return reduce_point(z, coset_system(level)); }

/// @brief Fourier-expansion evaluator Σ ρ(n) W_{0,it}(4π|n|y) e(nx) for an arbitrary coefficient sequence.
class FourierEvaluator {
public:
    /// rho(n) for n ≥ 1; ρ(−n) = parity·ρ(n); |ρ(n)| ≤ d(n)/√n is assumed for truncation.
    FourierEvaluator(std::function<cplx(long long)> rho, double t, int parity, double y_min = 0.05, double tail = 1e-12)
        : t_(std::abs(t)), parity_(parity), y_min_(y_min), tail_(tail) {
        if (!(y_min > 0)) throw std::invalid_argument("FourierEvaluator: y_min must be positive");
        if (parity != 1 && parity != -1) throw std::invalid_argument("FourierEvaluator: parity must be ±1");
        table_ = special::KBesselTable(t_, 2 * kPi * y_min_);
        scale_ = std::exp(-kPi * t_ / 2);
        nmax_ = terms(y_min_);
        rho_.resize(nmax_ + 1);
        for (long long n = 1; n <= nmax_; ++n) rho_[n] = rho(n);
    }

    double y_min() const { return y_min_; }
    double t() const { return t_; }

    /// Smallest N with Σ_{n>N} 4 d(n) √y e^{πt/2} K_0(2πny) below the tail target (d(n) ≤ n); the sum is
    /// accumulated in units of e^{-πt/2}, and |K_{it}| ≤ K_0.
    long long terms(double y) const {
        const double a = 2 * kPi * y;
        long long n = std::max<long long>(1, static_cast<long long>(std::ceil((t_ + 1) / a)));
        for (;; ++n) {
            double x = a * (n + 1);
            double first = 4 * double(n + 1) * std::sqrt(y) * std::sqrt(kPi / (2 * x)) * std::exp(kPi * t_ / 2 - x);
            double ratio = std::exp(-a) * (n + 2.0) / (n + 1.0);
            if (ratio < 1 && first / (1 - ratio) < tail_) return n;
        }
    }

    cplx operator()(const UpperHalfPoint& p) const {
        if (p.y < y_min_ * (1 - 1e-12))
            throw std::domain_error("eval_form: y = " + std::to_string(p.y) + " below supported floor " +
                                    std::to_string(y_min_));
        const long long N = std::min(terms(p.y), nmax_);
        const double a = 2 * kPi * p.y;
        const cplx step = std::polar(1.0, 2 * kPi * p.x);
        cplx e = 1.0, sum = 0.0;
        for (long long n = 1; n <= N; ++n) {
            e *= step;
            if (n % 64 == 0) e = std::polar(1.0, 2 * kPi * std::fmod(n * p.x, 1.0));
            double k = table_(a * n);
            if (k == 0) break;
            // ρ(n) W(4πny) = ρ(n) 2√(ny) K(2πny)
            cplx w = rho_[n] * (2 * std::sqrt(n * p.y) * k);
            sum += parity_ == 1 ? w * (2 * e.real()) : w * cplx(0, 2 * e.imag());
        }
        return scale_ * sum;
    }

private:
    double t_;
    int parity_;
    double y_min_, tail_, scale_ = 1;
    long long nmax_ = 0;
    special::KBesselTable table_;
    std::vector<cplx> rho_;
};

/// @brief Evaluator of g_ψ with ρ(1) = 1.
inline FourierEvaluator form_evaluator(const DihedralForm& g, double y_min = 0.05, double tail = 1e-12) {
    return FourierEvaluator([&g](long long n) { return cplx(g.lambda(n) / std::sqrt(double(n))); }, g.t(), g.parity(),
                            y_min, tail);
}

inline cplx eval_form(const DihedralForm& g, const UpperHalfPoint& z, double y_min = 0.05) {
    return form_evaluator(g, std::min(y_min, z.y))(z);
}

/// @brief Quadratic character χ_w attached to w | D (odd squarefree D), as a product of prime-discriminant characters.
inline int chi_divisor(long long D, long long w, long long n) {
    if (w == 1) return 1;
    if (w == D) return arith::kronecker(D, n);
    if (D % 2 == 0 || !arith::is_squarefree(D)) throw std::invalid_argument("chi_divisor: D must be odd squarefree");
    int v = 1;
    for (auto [p, e] : arith::factor(w)) v *= arith::kronecker(p % 4 == 1 ? p : -p, n);
    return v;
}

/// @brief Evaluator of g ⊗ χ̄_w: λ'(n) = χ_w(n)λ(n) for (n, w) = 1, χ_v(n)λ(n) otherwise (λ real).
inline FourierEvaluator twisted_evaluator(const DihedralForm& g, long long w, double y_min = 0.05) {
    const long long D = g.level();
    if (w < 1 || D % w) throw std::invalid_argument("twisted_evaluator: w must divide D");
    const long long v = D / w;
    auto rho = [&g, D, v, w](long long n) {
        int c = std::gcd(n, w) == 1 ? chi_divisor(D, w, n) : chi_divisor(D, v, n);
        return cplx(c * g.lambda(n) / std::sqrt(double(n)));
    };
    return FourierEvaluator(rho, g.t(), g.parity() * chi_divisor(D, w, -1), y_min);
}

/// @brief Atkin–Lehner matrix [[a w, b], [c D, d w]] of determinant w for w ‖ D.
inline Mat2 atkin_lehner_matrix(long long D, long long w) {
    if (w < 1 || D % w) throw std::invalid_argument("atkin_lehner_matrix: w must divide D");
    const long long v = D / w;
    if (std::gcd(v, w) != 1) throw std::invalid_argument("atkin_lehner_matrix: w must be a Hall divisor");
    if (w == 1) return {};
    if (v == 1) return {0, 1, -D, 0};
    arith::i64 x, y;
    arith::ext_gcd(w, v, x, y); // w x + v y = 1, take a = x, d = 1, c = −y, b = 1: adw − bcv = xw + yv
    return {x * w, 1, -y * D, w};
}

/// @brief max over samples of ||g(W_w z)| − |(g ⊗ χ̄_w)(z)||.
inline double atkin_lehner_check(const DihedralForm& g, long long w, const std::vector<UpperHalfPoint>& samples) {
    if (w == 1) return 0.0;
    Mat2 W = atkin_lehner_matrix(g.level(), w);
    double ymin = 0.05;
    for (const auto& z : samples) ymin = std::min({ymin, z.y, W.apply(z).y});
    auto f = form_evaluator(g, ymin);
    auto h = twisted_evaluator(g, w, ymin);
    double dev = 0;
    for (const auto& z : samples) dev = std::max(dev, std::abs(std::abs(f(W.apply(z))) - std::abs(h(z))));
    return dev;
}

namespace detail {

/// Σ_{q|c} c_c(n) c^{−2s} for squarefree q, n ≠ 0.
inline cplx ramanujan_series(long long q, long long n, cplx s, cplx zeta2s) {
    cplx tot = 0;
    for (long long d : arith::divisors(std::llabs(n))) {
        long long r = q / std::gcd(q, d);
        cplx f = double(arith::moebius(r)) * std::pow(double(r), -2.0 * s);
        for (auto [p, e] : arith::factor(r)) f /= 1.0 - std::pow(double(p), -2.0 * s);
        tot += std::pow(double(d), 1.0 - 2.0 * s) * f;
    }
    return tot / zeta2s;
}

/// Σ_{q|c} φ(c) c^{−2s} for squarefree q.
inline cplx totient_series(long long q, cplx s, cplx zeta2s) {
    cplx z21 = lfunc::zeta(2.0 * s - 1.0), tot = 0;
    for (long long g : arith::divisors(q)) {
        long long r = q / g;
        cplx f = double(arith::moebius(r)) * std::pow(double(r), -2.0 * s);
        for (auto [p, e] : arith::factor(r)) f *= (1.0 - std::pow(double(p), 1.0 - 2.0 * s)) / (1.0 - std::pow(double(p), -2.0 * s));
        tot += std::pow(double(g), 1.0 - 2.0 * s) * f;
    }
    return tot * z21 / zeta2s;
}

} // namespace detail

/// @brief E_∞(z, s) on Γ₀(q), q squarefree, Re s > 1.1, from its Fourier expansion.
class EisensteinEvaluator {
public:
    EisensteinEvaluator(long long q, cplx s, double y_min = 0.02, double tail = 1e-13)
        : q_(q), s_(s), y_min_(y_min), tail_(tail) {
        if (s.real() <= 1.1) throw std::domain_error("eval_eisenstein: Re(s) must exceed 1.1");
        if (q < 1 || !arith::is_squarefree(q)) throw std::invalid_argument("eval_eisenstein: level must be squarefree");
        if (!(y_min > 0)) throw std::invalid_argument("eval_eisenstein: y_min must be positive");
        cplx z2 = lfunc::zeta(2.0 * s);
        cplx lg = special::lgamma_c(s);
        c0_ = std::sqrt(kPi) * std::exp(special::lgamma_c(s - 0.5) - lg) * detail::totient_series(q, s, z2);
        nmax_ = terms(y_min);
        nu_ = s - 0.5;
        cn_.resize(nmax_ + 1);
        for (long long n = 1; n <= nmax_; ++n)
            cn_[n] = 2.0 * std::exp(s * std::log(kPi) - lg) * std::pow(double(n), s - 0.5) *
                     detail::ramanujan_series(q, n, s, z2);
    }

    long long terms(double y) const {
        // |φ_n| √y |K_ν(2πny)| ≲ n^{σ+1/2} e^{−2πny}·C; stop when the geometric tail is negligible
        const double a = 2 * kPi * y;
        const double sig = s_.real();
        long long n = 1;
        while (a * n < std::abs(s_ - 0.5) + 36 + (sig + 1.5) * std::log(double(n) + 1)) ++n;
        return n;
    }

    cplx operator()(const UpperHalfPoint& p) const {
        if (p.y < y_min_ * (1 - 1e-12)) throw std::domain_error("eval_eisenstein: y below supported floor");
        cplx val = std::pow(p.y, s_) + c0_ * std::pow(p.y, 1.0 - s_);
        const long long N = std::min(terms(p.y), nmax_);
        const double a = 2 * kPi * p.y, sy = std::sqrt(p.y);
        for (long long n = 1; n <= N; ++n) {
            cplx k = special::bessel_k(nu_, a * n);
            val += cn_[n] * sy * k * (2 * std::cos(2 * kPi * std::fmod(n * p.x, 1.0)));
        }
        return val;
    }

private:
    long long q_;
    cplx s_, nu_, c0_;
    double y_min_, tail_;
    long long nmax_ = 0;
    std::vector<cplx> cn_;
};

inline cplx eval_eisenstein(long long level, const UpperHalfPoint& z, cplx s) {
    return EisensteinEvaluator(level, s, std::min(0.02, z.y))(z);
}

/// @brief Options for quadrature over Γ₀(N)\H.
struct QuadratureOptions {
    double Y = 20;             ///< cusp truncation height in each SL₂(Z) translate
    double tol = 1e-9;         ///< absolute agreement between consecutive refinements
    int max_subdivisions = 6;  ///< dyadic refinements before giving up
    int base_panels = 2;       ///< x panels at the coarsest level
};

struct QuadratureResult {
    cplx value;
    double error;      ///< |I_n − I_{2n}| at termination
    int refinements;
};

namespace detail {

/// ∫_F φ(w) dμ(w) over F truncated at Im w ≤ Y, with 2^level-refined tensor Gauss–Legendre panels.
template <class F>
cplx integrate_sl2_domain(const F& phi, double Y, int panels) {
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    auto nodes = [&](double a, double b, auto&& fn) {
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            fn(m + h * xs[i], h * ws[i]);
            if (xs[i] != 0) fn(m - h * xs[i], h * ws[i]);
        }
    };
    cplx tot = 0;
    const double hx = 1.0 / panels;
    // geometric v-panels on [1, Y]
    std::vector<double> vb{1.0};
    while (vb.back() < Y) vb.push_back(std::min(Y, vb.back() * std::pow(2.0, 1.0 / panels)));
    for (int ix = 0; ix < panels; ++ix) {
        const double x0 = -0.5 + ix * hx, x1 = x0 + hx;
        nodes(x0, x1, [&](double x, double wx) {
            // sliver √(1−x²) ≤ v ≤ 1, split so refinement reaches it too
            const double lo = std::sqrt(1 - x * x), hv = (1.0 - lo) / panels;
            for (int iv = 0; iv < panels; ++iv)
                nodes(lo + iv * hv, lo + (iv + 1) * hv,
                      [&](double v, double wv) { tot += wx * wv / (v * v) * phi(x, v); });
            for (std::size_t k = 0; k + 1 < vb.size(); ++k)
                nodes(vb[k], vb[k + 1], [&](double v, double wv) { tot += wx * wv / (v * v) * phi(x, v); });
        });
    }
    return tot;
}

} // namespace detail

/// @brief ∫ over Γ₀(N)\H (cusps truncated at height Y in each translate) of an integrand h(z), refined until stable.
inline QuadratureResult integrate_quotient(const std::function<cplx(const UpperHalfPoint&)>& h, long long level,
                                           const QuadratureOptions& o = {}) {
    const CosetSystem cs = coset_system(level);
    auto phi = [&](double x, double v) {
        UpperHalfPoint w(x, v);
        cplx s = 0;
        for (const auto& a : cs.reps) s += h(a.apply(w));
        return s;
    };
    int p = o.base_panels;
    cplx prev = detail::integrate_sl2_domain(phi, o.Y, p);
    for (int r = 1; r <= o.max_subdivisions; ++r) {
        p *= 2;
        cplx cur = detail::integrate_sl2_domain(phi, o.Y, p);
        double err = std::abs(cur - prev);
        if (err <= o.tol) return {cur, err, r};
        prev = cur;
    }
    throw std::runtime_error("integrate_quotient: no convergence after max_subdivisions");
}

/// @brief Smallest Im over the truncated domain ∪ α_j F, used to size evaluators.
inline double domain_y_floor(long long level, double Y) {
    const CosetSystem cs = coset_system(level);
    double m = 1e300;
    for (const auto& a : cs.reps)
        for (double x : {-0.5, 0.0, 0.5})
            for (double v : {std::sqrt(1 - x * x), Y}) m = std::min(m, a.apply(UpperHalfPoint(x, v)).y);
    // corners of the truncation edge dominate; leave slack for interior nodes
    return 0.95 * m;
}

/// @brief Truncation height that keeps a form of spectral parameter t past its turning point at every cusp.
/// A cusp of width w sees K_{it}(2πY/w); width ≤ N, and a margin of 25 leaves |g|² below 1e-14 relative.
inline double cusp_height(long long level, double t, double Y = 20) {
    return std::max(Y, double(level) * (std::abs(t) + 25) / (2 * kPi));
}

/// @brief Volume of Γ₀(N)\H by quadrature plus the exact cusp strips ν(N)/Y.
inline double quotient_volume(long long level, const QuadratureOptions& o = {}) {
    auto r = integrate_quotient([](const UpperHalfPoint&) { return cplx(1); }, level, o);
    return r.value.real() + double(arith::nu(level)) / o.Y;
}

/// @brief ⟨u, v⟩ = ∫ u(z) conj(v(z)) dμ(z) over Γ₀(N)\H.
inline QuadratureResult petersson_inner(const std::function<cplx(const UpperHalfPoint&)>& u,
                                        const std::function<cplx(const UpperHalfPoint&)>& v, long long level,
                                        const QuadratureOptions& o = {}) {
    return integrate_quotient([&](const UpperHalfPoint& z) { return u(z) * std::conj(v(z)); }, level, o);
}

/// @brief Closed form ⟨g, g⟩ = 2Λ(1, ad g) for ρ(1) = 1 at level D.
inline double norm_closed_form(const DihedralForm& g) {
    DihedralForm g2 = make_dihedral(g.level(), 2 * g.ell(), g.kappa());
    return 2 * lfunc::completed_ad(1.0, g2).real();
}

/// @brief Scaling matrix data recorded alongside outputs at the cusp 1/v: W_w with d w − b v = 1.
struct ScalingMatrix {
    long long v, w, b, d;
};

inline ScalingMatrix scaling_matrix(long long q, long long v) {
    if (v < 1 || q % v) throw std::invalid_argument("scaling_matrix: v must divide q");
    long long w = q / v;
    arith::i64 x, y;
    arith::ext_gcd(w, v, x, y); // w x + v y = 1 → d = x, b = −y
    return {v, w, -y, x};
}

} // namespace dihedral::automorphic
