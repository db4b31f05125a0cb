#pragma once

#include "arith.hpp"
#include "precision.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace dihedral {

using Integer = boost::multiprecision::cpp_int;

/// @brief Algebraic integer a + b·ω with ω = (1+√D)/2.
struct QInt {
    Integer a = 0;
    Integer b = 0;
    bool operator==(const QInt&) const = default;
};

/// @brief Reduced indefinite binary quadratic form a x² + b xy + c y².
struct Form {
    long long a, b, c;
    bool operator<(const Form& o) const {
        return std::tie(a, b, c) < std::tie(o.a, o.b, o.c);
    }
    bool operator==(const Form&) const = default;
};

/// @brief Integral ideal given by a canonical generator (principal case).
struct IdealRep {
    QInt generator;
    long long norm = 1;
    int class_index = 0;
};

/// @brief Real quadratic field Q(√D), D ≡ 1 mod 4 squarefree.
struct QuadField {
    long long D = 0;
    QInt eps;          ///< fundamental unit ε > 1
    Real50 eps_log;    ///< log ε
    int unit_norm = 0; ///< N(ε)
    int class_number = 0;
    int narrow_class_number = 0;
    std::vector<Form> class_reps; ///< one reduced form per narrow class
    Real50 w_plus, w_minus;       ///< ω and σω

    long long m() const { return (D - 1) / 4; }

    QInt mul(const QInt& x, const QInt& y) const {
        Integer mm = m();
        return {x.a * y.a + mm * x.b * y.b, x.a * y.b + x.b * y.a + x.b * y.b};
    }
    QInt conj(const QInt& x) const { return {x.a + x.b, -x.b}; }
    Integer norm(const QInt& x) const { return x.a * x.a + x.a * x.b - Integer(m()) * x.b * x.b; }

    /// @brief Real embedding (σ = false) or its conjugate (σ = true).
    Real50 embed(const QInt& x, bool sigma = false) const {
        return Real50(x.a) + Real50(x.b) * (sigma ? w_minus : w_plus);
    }

    /// @brief log|α/σα| in 50-digit arithmetic.
    Real50 log_ratio(const QInt& x) const {
        using boost::multiprecision::abs;
        using boost::multiprecision::log;
        return log(abs(embed(x))) - log(abs(embed(x, true)));
    }

    QInt eps_inverse() const {
        QInt c = conj(eps);
        if (unit_norm < 0) { c.a = -c.a; c.b = -c.b; }
        return c;
    }

    /// @brief Unit multiple of x with 1 ≤ |x/σx| < ε² and x > 0.
    QInt canonical(QInt x) const {
        if (x.a == 0 && x.b == 0) throw std::invalid_argument("canonical: zero element");
        Real50 r = log_ratio(x);
        Real50 two = 2 * eps_log;
        long long k = static_cast<long long>(boost::multiprecision::floor(r / two));
        const Real50 snap("1e-40");
        Real50 rr = r - k * two;
        if (two - rr < snap) ++k;
        else if (rr < 0 && -rr > snap) --k;
        QInt u = k > 0 ? eps_inverse() : eps;
        for (long long i = 0; i < (k > 0 ? k : -k); ++i) x = mul(x, u);
        if (embed(x) < 0) { x.a = -x.a; x.b = -x.b; }
        return x;
    }
};

namespace detail {

inline Integer isqrt(const Integer& n) { return boost::multiprecision::sqrt(n); }

/// Fundamental unit from the period of the continued fraction of the reduced number (b+√D)/2.
inline QInt fundamental_unit(long long D) {
    Integer sD = isqrt(Integer(D));
    Integer b0 = (sD % 2 == 1) ? sD : sD - 1;
    Integer P = b0, Q = 2;
    Integer qm2 = 1, qm1 = 0;
    do {
        Integer a = (P + sD) / Q;
        Integer qk = a * qm1 + qm2;
        qm2 = qm1;
        qm1 = qk;
        P = a * Q - P;
        Q = (Integer(D) - P * P) / Q;
    } while (!(P == b0 && Q == 2));
    // ε = q_k x + q_{k-1} with x = ω + (b0-1)/2
    return {qm2 + qm1 * ((b0 - 1) / 2), qm1};
}

inline std::vector<Form> reduced_forms(long long D) {
    std::vector<Form> out;
    long double s = std::sqrt(static_cast<long double>(D));
    for (long long b = 1; b < s; b += 2) {
        long long n = (D - b * b) / 4; // a·c = -n
        for (long long A = 1; A <= n; ++A) {
            if (n % A) continue;
            long double twoa = 2.0L * A;
            if (!(s - b < twoa && twoa < s + b)) continue;
            out.push_back({A, b, -n / A});
            out.push_back({-A, b, n / A});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline Form rho(const Form& f, long long D) {
    long double s = std::sqrt(static_cast<long double>(D));
    long long c = f.c;
    long long m2 = 2 * (c < 0 ? -c : c);
    // b' ≡ -b mod 2|c|, with √D - 2|c| < b' < √D
    long long bp = arith::mod(-f.b, m2);
    long long lo = static_cast<long long>(std::floor(s - m2)) + 1;
    while (bp < lo) bp += m2;
    while (bp - m2 >= lo) bp -= m2;
    return {c, bp, (bp * bp - D) / (4 * c)};
}

} // namespace detail

/// @brief Builds Q(√D) with its unit and class data; throws on invalid D.
inline QuadField make_field(long long D) {
    if (D <= 1) throw std::invalid_argument("make_field: D must exceed 1");
    if (arith::mod(D, 4) != 1) throw std::invalid_argument("make_field: D must be congruent to 1 mod 4");
    if (!arith::is_squarefree(D)) throw std::invalid_argument("make_field: D must be squarefree");
    QuadField F;
    F.D = D;
    Real50 s = boost::multiprecision::sqrt(Real50(D));
    F.w_plus = (1 + s) / 2;
    F.w_minus = (1 - s) / 2;
    F.eps = detail::fundamental_unit(D);
    Integer N = F.norm(F.eps);
    if (N != 1 && N != -1) throw std::logic_error("make_field: unit norm check failed");
    F.unit_norm = static_cast<int>(N);
    F.eps_log = boost::multiprecision::log(F.embed(F.eps));

    auto forms = detail::reduced_forms(D);
    std::set<Form> seen;
    for (const Form& f : forms) {
        if (seen.count(f)) continue;
        F.class_reps.push_back(f);
        Form g = f;
        do {
            seen.insert(g);
            g = detail::rho(g, D);
        } while (!(g == f) && !seen.count(g));
    }
    F.narrow_class_number = static_cast<int>(F.class_reps.size());
    F.class_number = F.unit_norm < 0 ? F.narrow_class_number : F.narrow_class_number / 2;
    return F;
}

/// @brief Kronecker symbol (D/n).
inline int chi(const QuadField& F, long long n) { return arith::kronecker(F.D, n); }

enum class SplitType { split, inert, ramified };

inline SplitType split_type(const QuadField& F, long long p) {
    int c = chi(F, p);
    return c == 0 ? SplitType::ramified : (c > 0 ? SplitType::split : SplitType::inert);
}

/// @brief Some generator of a prime ideal above p (split or ramified); class number one only.
inline QInt prime_generator_raw(const QuadField& F, long long p) {
    if (F.class_number != 1) throw std::domain_error("prime_generator: class number > 1 unsupported");
    SplitType st = split_type(F, p);
    if (st == SplitType::inert) return {Integer(p), 0};
    long long b;
    if (st == SplitType::ramified) {
        b = p;
    } else if (p == 2) {
        b = 1; // D ≡ 1 mod 8, b² ≡ D mod 8
    } else {
        b = arith::sqrt_mod_prime(arith::mod(F.D, p), p);
        if (b % 2 == 0) b = p - b;
    }
    // lattice pZ + ((b-1)/2 + ω)Z in the Minkowski embedding, Lagrange-reduced
    long double s = std::sqrt(static_cast<long double>(F.D));
    long double wp = (1 + s) / 2, wm = (1 - s) / 2;
    long long h = (b - 1) / 2;
    struct V { long long ca, cb; long double e1, e2; }; // ca·p + cb·β
    auto emb = [&](long long ca, long long cb) {
        return V{ca, cb, (long double)ca * p + cb * (h + wp), (long double)ca * p + cb * (h + wm)};
    };
    auto dot = [](const V& x, const V& y) { return x.e1 * y.e1 + x.e2 * y.e2; };
    V u = emb(1, 0), v = emb(0, 1);
    if (dot(u, u) < dot(v, v)) std::swap(u, v);
    while (true) {
        long long k = std::llround(dot(u, v) / dot(v, v));
        u = emb(u.ca - k * v.ca, u.cb - k * v.cb);
        if (dot(u, u) >= dot(v, v)) break;
        std::swap(u, v);
    }
    long double g11 = dot(u, u), g12 = dot(u, v), g22 = dot(v, v);
    long double det = g11 * g22 - g12 * g12;
    long double epsd = static_cast<long double>(F.eps_log.convert_to<double>());
    long double B = p * (std::exp(epsd) + std::exp(-epsd)) * 1.01L + 1;
    long long ymax = static_cast<long long>(std::sqrt(B * g11 / det)) + 1;
    for (long long y = -ymax; y <= ymax; ++y) {
        long double disc = g12 * g12 * y * y - g11 * (g22 * y * y - B);
        if (disc < 0) continue;
        long double r = std::sqrt(disc);
        long long x0 = static_cast<long long>(std::floor((-g12 * y - r) / g11)) - 1;
        long long x1 = static_cast<long long>(std::ceil((-g12 * y + r) / g11)) + 1;
        for (long long x = x0; x <= x1; ++x) {
            long long ca = x * u.ca + y * v.ca, cb = x * u.cb + y * v.cb;
            __int128 A = (__int128)ca * p + (__int128)cb * h, Bc = cb;
            __int128 N = A * A + A * Bc - (__int128)F.m() * Bc * Bc;
            if (N == p || N == -p) return {Integer((long long)A), Integer((long long)Bc)};
        }
    }
    throw std::logic_error("prime_generator: no generator found");
}

/// @brief Canonical generator of a prime ideal above p.
inline QInt prime_generator(const QuadField& F, long long p) { return F.canonical(prime_generator_raw(F, p)); }

/// @brief All integral ideals of norm n with canonical generators (h = 1).
inline std::vector<IdealRep> ideals_of_norm(const QuadField& F, long long n) {
    if (n < 1) throw std::invalid_argument("ideals_of_norm: n must be positive");
    std::vector<QInt> gens{{1, 0}};
    for (auto [p, e] : arith::factor(n)) {
        std::vector<QInt> local;
        SplitType st = split_type(F, p);
        if (st == SplitType::inert) {
            if (e % 2) return {};
            QInt g{1, 0};
            for (int i = 0; i < e / 2; ++i) g = F.mul(g, {Integer(p), 0});
            local.push_back(g);
        } else if (st == SplitType::ramified) {
            QInt pi = prime_generator(F, p), g{1, 0};
            for (int i = 0; i < e; ++i) g = F.mul(g, pi);
            local.push_back(g);
        } else {
            QInt pi = prime_generator(F, p), pc = F.conj(pi);
            for (int j = 0; j <= e; ++j) {
                QInt g{1, 0};
                for (int i = 0; i < j; ++i) g = F.mul(g, pi);
                for (int i = j; i < e; ++i) g = F.mul(g, pc);
                local.push_back(g);
            }
        }
        std::vector<QInt> next;
        for (const auto& g : gens)
            for (const auto& l : local) next.push_back(F.mul(g, l));
        gens = std::move(next);
    }
    std::vector<IdealRep> out;
    for (auto& g : gens) out.push_back({F.canonical(g), n, 0});
    return out;
}

inline std::string to_string(const QInt& x) {
    std::ostringstream os;
    os << x.a << " + " << x.b << "*w";
    return os.str();
}

} // namespace dihedral
