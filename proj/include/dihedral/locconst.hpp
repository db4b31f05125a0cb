#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

/// @brief Exact non-archimedean local constants of the triple product period.
///
/// Every local integral is a sum over valuation lattices of piecewise
/// geometric terms; those sums are evaluated in closed form over
/// Q(i)(√q), so the results are exact.
namespace dihedral::locconst {

using Rational = boost::multiprecision::cpp_rational;

/// @brief Gaussian rational re + i·im.
struct Gaussian {
    Rational re{0}, im{0};

    Gaussian() = default;
    Gaussian(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}
    Gaussian(long r) : re(r) {}

    bool is_zero() const { return re == 0 && im == 0; }
    Gaussian conj() const { return {re, -im}; }
    Rational norm2() const { return re * re + im * im; }
    Gaussian inverse() const {
        if (is_zero()) throw std::domain_error("Gaussian: division by zero");
        Rational n = norm2();
        return {re / n, -im / n};
    }
    std::complex<double> to_complex() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }

    friend Gaussian operator+(const Gaussian& a, const Gaussian& b) { return {a.re + b.re, a.im + b.im}; }
    friend Gaussian operator-(const Gaussian& a, const Gaussian& b) { return {a.re - b.re, a.im - b.im}; }
    friend Gaussian operator-(const Gaussian& a) { return {-a.re, -a.im}; }
    friend Gaussian operator*(const Gaussian& a, const Gaussian& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Gaussian operator/(const Gaussian& a, const Gaussian& b) { return a * b.inverse(); }
    friend bool operator==(const Gaussian& a, const Gaussian& b) { return a.re == b.re && a.im == b.im; }
};

namespace detail {

inline std::optional<long> exact_sqrt(long q) {
    long s = static_cast<long>(std::llround(std::sqrt(static_cast<double>(q))));
    for (long c = std::max(0L, s - 1); c <= s + 1; ++c)
        if (c * c == q) return c;
    return std::nullopt;
}

// sign of p + v√q, q not a perfect square unless v == 0
inline int sign_surd(const Rational& p, const Rational& v, long q) {
    int sp = p > 0 ? 1 : (p < 0 ? -1 : 0);
    int sv = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (sv == 0) return sp;
    if (sp == 0) return sv;
    if (sp == sv) return sp;
    return p * p > v * v * q ? sp : sv;
}

} // namespace detail

/// @brief Element a + b·√q of Q(i)(√q). When q is a perfect square b is
/// folded into a. q = 0 marks a q-free constant.
class Number {
  public:
    Number() = default;
    Number(long v) : a_(v) {}
    Number(Rational v) : a_(std::move(v)) {}
    Number(Gaussian v) : a_(std::move(v)) {}
    Number(Gaussian a, Gaussian b, long q) : a_(std::move(a)), b_(std::move(b)), q_(q) { normalise(); }

    /// @brief √q as an element of the field.
    static Number sqrt_q(long q) { return Number(Gaussian(0), Gaussian(1), q); }

    const Gaussian& a() const { return a_; }
    const Gaussian& b() const { return b_; }
    long q() const { return q_; }

    bool is_zero() const { return a_.is_zero() && b_.is_zero(); }
    bool is_rational() const { return b_.is_zero() && a_.im == 0; }
    Rational to_rational() const {
        if (!is_rational()) throw std::domain_error("Number: value is not rational");
        return a_.re;
    }
    std::complex<double> to_complex() const {
        double r = q_ > 0 ? std::sqrt(static_cast<double>(q_)) : 0.0;
        return a_.to_complex() + b_.to_complex() * r;
    }

    Number conj() const { return Number(a_.conj(), b_.conj(), q_); }

    /// @brief Sign of |x|² − 1, decided exactly.
    int compare_abs_to_one() const {
        // x·x̄ = (|a|² + q|b|²) + 2Re(a b̄)√q
        Rational p = a_.norm2() + b_.norm2() * q_ - 1;
        Rational v = 2 * (a_ * b_.conj()).re;
        return detail::sign_surd(p, v, q_);
    }

    Number inverse() const {
        if (is_zero()) throw std::domain_error("Number: division by zero");
        if (b_.is_zero()) return Number(a_.inverse(), Gaussian(0), q_);
        Gaussian den = a_ * a_ - b_ * b_ * Gaussian(q_);
        return Number(a_ / den, -b_ / den, q_);
    }

    Number pow(long e) const {
        Number base = e < 0 ? inverse() : *this;
        unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
        Number r(1);
        r.q_ = q_;
        while (k) {
            if (k & 1) r = r * base;
            base = base * base;
            k >>= 1;
        }
        return r;
    }

    friend Number operator+(const Number& x, const Number& y) {
        long q = join(x, y);
        return Number(x.a_ + y.a_, x.b_ + y.b_, q);
    }
    friend Number operator-(const Number& x) { return Number(-x.a_, -x.b_, x.q_); }
    friend Number operator-(const Number& x, const Number& y) { return x + (-y); }
    friend Number operator*(const Number& x, const Number& y) {
        long q = join(x, y);
        return Number(x.a_ * y.a_ + x.b_ * y.b_ * Gaussian(q), x.a_ * y.b_ + x.b_ * y.a_, q);
    }
    friend Number operator/(const Number& x, const Number& y) { return x * y.inverse(); }
    Number& operator+=(const Number& y) { return *this = *this + y; }
    Number& operator*=(const Number& y) { return *this = *this * y; }
    friend bool operator==(const Number& x, const Number& y) { return (x - y).is_zero(); }

    std::string to_string() const {
        auto gs = [](const Gaussian& g) {
            std::ostringstream o;
            if (g.im == 0) o << g.re;
            else if (g.re == 0) o << g.im << "i";
            else o << "(" << g.re << (g.im > 0 ? "+" : "") << g.im << "i)";
            return o.str();
        };
        if (b_.is_zero()) return gs(a_);
        std::ostringstream o;
        o << gs(a_) << " + " << gs(b_) << "*sqrt(" << q_ << ")";
        return o.str();
    }

  private:
    static long join(const Number& x, const Number& y) {
        if (x.q_ && y.q_ && x.q_ != y.q_) throw std::invalid_argument("Number: mixed residue cardinalities");
        return x.q_ ? x.q_ : y.q_;
    }
    void normalise() {
        if (b_.is_zero()) return;
        if (q_ < 1) throw std::invalid_argument("Number: surd part needs q >= 1");
        if (auto s = detail::exact_sqrt(q_)) {
            a_ = a_ + b_ * Gaussian(*s);
            b_ = Gaussian(0);
        }
    }

    Gaussian a_{0}, b_{0};
    long q_ = 0;
};

/// @brief Raised when a valuation series does not converge absolutely.
class DivergentSeries : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// @brief Formal restriction of a character to O^×: exponents of
/// independent ramified generators. The trivial character is empty.
using UnitChar = std::map<int, int>;

inline UnitChar unit_product(UnitChar x, const UnitChar& y, int sign = 1) {
    for (auto [g, e] : y) {
        int& v = x[g];
        v += sign * e;
        if (v == 0) x.erase(g);
    }
    return x;
}

inline UnitChar unit_inverse(const UnitChar& x) { return unit_product({}, x, -1); }

/// @brief Linear constraint cn·n + cm·m ≤ c on the valuation lattice.
struct Ineq {
    int cn, cm;
    long c;
};

/// @brief coeff · rn^n · rm^m on a polyhedral region of Z², times formal
/// unit characters of the two variables and ψ(psi·a) in the first.
struct Piece {
    Number coeff{1}, rn{1}, rm{1};
    UnitChar units_n, units_m;
    int psi = 0;
    std::vector<Ineq> region;

    bool contains(long n, long m) const {
        for (const auto& r : region)
            if (r.cn * n + r.cm * m > r.c) return false;
        return true;
    }
};

/// @brief Piecewise geometric function on the valuation lattice.
using Series = std::vector<Piece>;

inline Series operator*(const Series& x, const Series& y) {
    Series out;
    for (const auto& p : x)
        for (const auto& r : y) {
            Piece t;
            t.coeff = p.coeff * r.coeff;
            if (t.coeff.is_zero()) continue;
            t.rn = p.rn * r.rn;
            t.rm = p.rm * r.rm;
            t.units_n = unit_product(p.units_n, r.units_n);
            t.units_m = unit_product(p.units_m, r.units_m);
            t.psi = p.psi + r.psi;
            t.region = p.region;
            t.region.insert(t.region.end(), r.region.begin(), r.region.end());
            out.push_back(std::move(t));
        }
    return out;
}

inline Series scaled(Series s, const Number& c) {
    for (auto& p : s) p.coeff = p.coeff * c;
    return s;
}

/// @brief Value of the lattice function at (n, m), characters on units
/// and ψ evaluated at 1.
inline Number evaluate(const Series& s, long n, long m = 0) {
    Number v(0);
    for (const auto& p : s)
        if (p.contains(n, m)) v += p.coeff * p.rn.pow(n) * p.rm.pow(m);
    return v;
}

namespace detail {

constexpr long kInf = std::numeric_limits<long>::max() / 4;

struct Line {
    long s, t; // s·n + t
    long at(long n) const { return s * n + t; }
};

// c · r^n · n^k
struct Term {
    Number c, r;
    int k;
};

inline long floor_div(long a, long b) {
    long d = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --d;
    return d;
}

inline void require_small(const Number& r, const char* what) {
    if (r.compare_abs_to_one() >= 0) throw DivergentSeries(std::string("valuation series diverges: ") + what);
}

inline void require_large(const Number& r, const char* what) {
    if (r.compare_abs_to_one() <= 0) throw DivergentSeries(std::string("valuation series diverges: ") + what);
}

// Σ_{n=lo}^{hi} n^k r^n with possibly infinite ends
inline Number sum_term(const Term& t, long lo, long hi) {
    if (t.c.is_zero()) return Number(0);
    const Number& r = t.r;
    if (lo > -kInf && hi < kInf) {
        Number acc(0);
        for (long n = lo; n <= hi; ++n) acc += (t.k ? Number(n) : Number(1)) * r.pow(n);
        return t.c * acc;
    }
    Number one(1);
    if (hi >= kInf && lo <= -kInf) throw DivergentSeries("valuation series diverges: two-sided sum");
    if (hi >= kInf) {
        require_small(r, "ascending tail");
        Number head = r.pow(lo);
        Number g = one / (one - r);
        if (t.k == 0) return t.c * head * g;
        return t.c * head * (Number(lo) * g + r * g * g);
    }
    require_large(r, "descending tail");
    Number s = r.inverse();
    Number head = s.pow(-hi);
    Number g = one / (one - s);
    if (t.k == 0) return t.c * head * g;
    return -(t.c * head * (Number(-hi) * g + s * g * g));
}

// inner Σ_m rm^m over [L(n), U(n)] expanded as terms in n
inline std::vector<Term> inner_terms(const Piece& p, const std::optional<Line>& lo, const std::optional<Line>& up) {
    const Number& rm = p.rm;
    Number one(1);
    std::vector<Term> out;
    if (rm == one) {
        if (!lo || !up) throw DivergentSeries("valuation series diverges: unbounded constant direction");
        out.push_back({p.coeff * Number(up->s - lo->s), p.rn, 1});
        out.push_back({p.coeff * Number(up->t - lo->t + 1), p.rn, 0});
        return out;
    }
    if (lo && up) {
        Number g = one / (one - rm);
        out.push_back({p.coeff * rm.pow(lo->t) * g, p.rn * rm.pow(lo->s), 0});
        out.push_back({-(p.coeff * rm.pow(up->t + 1) * g), p.rn * rm.pow(up->s), 0});
    } else if (lo) {
        require_small(rm, "second variable ascending");
        out.push_back({p.coeff * rm.pow(lo->t) / (one - rm), p.rn * rm.pow(lo->s), 0});
    } else if (up) {
        require_large(rm, "second variable descending");
        out.push_back({p.coeff * rm.pow(up->t) / (one - rm.inverse()), p.rn * rm.pow(up->s), 0});
    } else {
        throw DivergentSeries("valuation series diverges: second variable unbounded");
    }
    return out;
}

inline Number sum_region(const Piece& p) {
    long nlo = -kInf, nhi = kInf;
    std::vector<Line> lows, ups;
    for (const auto& r : p.region) {
        if (r.cm == 0) {
            if (r.cn == 0) {
                if (r.c < 0) return Number(0);
            } else if (r.cn > 0) {
                nhi = std::min(nhi, floor_div(r.c, r.cn));
            } else {
                nlo = std::max(nlo, -floor_div(r.c, -r.cn));
            }
        } else if (r.cm == 1) {
            ups.push_back({-r.cn, r.c});
        } else if (r.cm == -1) {
            lows.push_back({r.cn, -r.c});
        } else {
            throw std::invalid_argument("sum_region: |cm| > 1 unsupported");
        }
    }
    if (nlo > nhi) return Number(0);

    std::set<long> bp;
    if (nlo > -kInf) bp.insert(nlo);
    if (nhi < kInf) bp.insert(nhi);
    std::vector<Line> all = lows;
    all.insert(all.end(), ups.begin(), ups.end());
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            long ds = all[i].s - all[j].s;
            if (ds == 0) continue;
            long f = floor_div(all[j].t - all[i].t, ds);
            bp.insert(f);
            bp.insert(f + 1);
        }
    if (bp.empty()) bp.insert(0);

    struct Segment {
        long lo, hi;
    };
    std::vector<Segment> segs;
    std::vector<long> b(bp.begin(), bp.end());
    segs.push_back({-kInf, b.front() - 1});
    for (std::size_t i = 0; i < b.size(); ++i) {
        segs.push_back({b[i], b[i]});
        if (i + 1 < b.size() && b[i] + 1 <= b[i + 1] - 1) segs.push_back({b[i] + 1, b[i + 1] - 1});
    }
    segs.push_back({b.back() + 1, kInf});

    Number total(0);
    for (auto sg : segs) {
        long lo = std::max(sg.lo, nlo), hi = std::min(sg.hi, nhi);
        if (lo > hi) continue;
        long rep = lo > -kInf ? lo : hi;
        std::optional<Line> L, U;
        for (const auto& l : lows)
            if (!L || l.at(rep) > L->at(rep)) L = l;
        for (const auto& u : ups)
            if (!U || u.at(rep) < U->at(rep)) U = u;
        if (L && U && L->at(rep) > U->at(rep)) continue;
        for (const auto& t : inner_terms(p, L, U)) total += sum_term(t, lo, hi);
    }
    return total;
}

} // namespace detail

/// @brief Exact integral of a lattice function against the counting measure.
///
/// Pieces carrying a nontrivial character of O^× integrate to zero over each
/// unit shell. A factor ψ(±a) is replaced by its shell average: 1 on
/// v(a) ≥ 0, −1/(q−1) on v(a) = −1, 0 below.
inline Number sum_lattice(const Series& s, long q) {
    Number total(0);
    for (const auto& p0 : s) {
        if (p0.coeff.is_zero()) continue;
        if (p0.psi != 0) {
            if (!p0.units_n.empty())
                throw std::logic_error("sum_lattice: ramified character against ψ on one shell is not modelled");
            if (p0.psi != 1 && p0.psi != -1) throw std::logic_error("sum_lattice: ψ(k·a) with |k| > 1");
            Piece hi = p0, at = p0;
            hi.psi = at.psi = 0;
            hi.region.push_back({-1, 0, 0});                      // n ≥ 0
            at.region.push_back({1, 0, -1});                      // n = −1
            at.region.push_back({-1, 0, 1});
            at.coeff = at.coeff * Number(Rational(-1, q - 1));
            total += sum_lattice({hi, at}, q);
            continue;
        }
        if (!p0.units_n.empty() || !p0.units_m.empty()) continue;
        total += detail::sum_region(p0);
    }
    return total;
}

/// @brief Local zeta factor ζ_F(s) = (1 − q^{−s})^{−1} at integer s.
inline Rational zeta_local(long q, int s) {
    Rational x = 1;
    for (int i = 0; i < s; ++i) x /= q;
    return 1 / (1 - x);
}

/// @brief Weights A_0..A_m of the K-integration formula for right
/// K_1(𝔭^m)-invariant functions.
inline std::vector<Rational> hu_weights(long q, int m) {
    if (m < 1) throw std::invalid_argument("hu_weights: m must be >= 1");
    if (q < 2) throw std::invalid_argument("hu_weights: q must be >= 2");
    Rational z1 = zeta_local(q, 1), z2 = zeta_local(q, 2);
    std::vector<Rational> a(m + 1);
    Rational qj = 1;
    for (int j = 0; j <= m; ++j) {
        if (j == 0) a[j] = z2 / z1;
        else if (j < m) a[j] = qj * z2 / (z1 * z1);
        else a[j] = qj * z2 / z1;
        qj /= q;
    }
    return a;
}

enum class RepKind { conductor_one, special, unramified };

/// @brief Irreducible unitarisable representation of conductor exponent ≤ 1.
///
/// conductor_one: σ ⊞ σ′ with c(σ) = 1, c(σ′) = 0.
/// special: ω·St with ω unramified.
/// unramified: χ ⊞ χ^{-1} with χ(ϖ) = α.
struct LocalRep {
    RepKind kind = RepKind::unramified;
    Gaussian ram_pi{1};   ///< σ(ϖ)
    UnitChar ram_units;   ///< σ on O^×
    Gaussian unr_pi{1};   ///< σ′(ϖ), ω(ϖ) or α
    Gaussian eps_half{1}; ///< ε(1/2, σσ′^{-1}, ψ)
    int eps_sign = 1;     ///< (σσ′^{-1})(−1)

    /// @brief Contragredient representation.
    LocalRep dual() const {
        LocalRep d = *this;
        d.unr_pi = unr_pi.inverse();
        if (kind == RepKind::conductor_one) {
            d.ram_pi = ram_pi.inverse();
            d.ram_units = unit_inverse(ram_units);
            d.eps_half = Gaussian(eps_sign) / eps_half;
        }
        return d;
    }

    /// @brief Central character at ϖ and on units.
    std::pair<Gaussian, UnitChar> central() const {
        switch (kind) {
        case RepKind::conductor_one: return {ram_pi * unr_pi, ram_units};
        case RepKind::special: return {unr_pi * unr_pi, {}};
        case RepKind::unramified: return {Gaussian(1), {}};
        }
        return {};
    }
};

enum class CaseId { special_2St, unramified_PS, translated_PS, all_ramified_PS };

inline std::string to_string(CaseId c) {
    switch (c) {
    case CaseId::special_2St: return "special_2St";
    case CaseId::unramified_PS: return "unramified_PS";
    case CaseId::translated_PS: return "translated_PS";
    case CaseId::all_ramified_PS: return "all_ramified_PS";
    }
    return "?";
}

inline CaseId case_from_string(const std::string& s) {
    for (auto c : {CaseId::special_2St, CaseId::unramified_PS, CaseId::translated_PS, CaseId::all_ramified_PS})
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown local case: " + s);
}

/// @brief Unit-circle and unramified parameters of a case.
struct CharacterData {
    Gaussian omega1_pi{Rational(3, 5), Rational(4, 5)};    ///< ω₁(ϖ)
    Gaussian omega1p_pi{Rational(5, 13), Rational(12, 13)}; ///< ω₁′(ϖ)
    Gaussian eps_half{Rational(8, 17), Rational(-15, 17)}; ///< ε(1/2, ω₁ω₁′^{-1}, ψ)
    int eps_sign = 1;                                        ///< (ω₁ω₁′^{-1})(−1)
    Gaussian omega3_pi{1};                                   ///< ω₃(ϖ), resp. α
};

/// @brief Triple (π₁, π₂, π₃) with newforms, optionally translating the
/// third vector and/or its dual partner by diag(ϖ^{-1}, 1).
struct LocalCase {
    CaseId id = CaseId::special_2St;
    long q = 2;
    std::array<LocalRep, 3> reps;
    bool translate = false;
    bool translate_dual = false;

    /// @brief Checks the conductor table, unitarity and the central character.
    void validate() const {
        if (q < 2) throw std::invalid_argument("LocalCase: q must be >= 2");
        Gaussian cpi(1);
        UnitChar cu;
        for (const auto& r : reps) {
            auto [c, u] = r.central();
            cpi = cpi * c;
            cu = unit_product(cu, u);
            switch (r.kind) {
            case RepKind::conductor_one:
                if (r.ram_units.empty()) throw std::invalid_argument("LocalCase: ramified character has c = 0");
                if (r.ram_pi.norm2() != 1 || r.unr_pi.norm2() != 1 || r.eps_half.norm2() != 1)
                    throw std::invalid_argument("LocalCase: conductor-one parameters must be unitary");
                if (r.eps_sign != 1 && r.eps_sign != -1) throw std::invalid_argument("LocalCase: sign must be ±1");
                break;
            case RepKind::special:
                if (!(r.unr_pi * r.unr_pi == Gaussian(1)))
                    throw std::invalid_argument("LocalCase: special twist must satisfy ω(ϖ)² = 1");
                break;
            case RepKind::unramified: {
                Rational n2 = r.unr_pi.norm2();
                if (!(n2 * q > 1 && n2 < q))
                    throw DivergentSeries("LocalCase: need q^{-1/2} < |α| < q^{1/2}");
                bool tempered = n2 == 1;
                bool complementary = r.unr_pi.im == 0;
                if (!tempered && !complementary) throw std::invalid_argument("LocalCase: α not unitarisable");
                if (r.unr_pi * r.unr_pi == Gaussian(1))
                    throw std::invalid_argument("LocalCase: α = ±1 is a double Satake root; use α² ≠ 1");
                break;
            }
            }
        }
        if (!(cpi == Gaussian(1)) || !cu.empty())
            throw std::invalid_argument("LocalCase: product of central characters is not trivial");
        if ((translate || translate_dual) && reps[2].kind != RepKind::unramified)
            throw std::invalid_argument("LocalCase: translation is only defined for the unramified third factor");
    }
};

/// @brief Builds a case from the character data.
///
/// special_2St: π₂ = π̃₁, π₃ = ω₃St. unramified_PS / translated_PS: π₃ =
/// ω₃ ⊞ ω₃^{-1} (translated: both vectors of π₃ translated).
/// all_ramified_PS: three conductor-one principal series whose ramified
/// parts multiply to an unramified character.
inline LocalCase make_case(CaseId id, long q, const CharacterData& d = {}) {
    LocalCase c;
    c.id = id;
    c.q = q;
    LocalRep p1;
    p1.kind = RepKind::conductor_one;
    p1.ram_pi = d.omega1_pi;
    p1.ram_units = {{0, 1}};
    p1.unr_pi = d.omega1p_pi;
    p1.eps_half = d.eps_half;
    p1.eps_sign = d.eps_sign;
    c.reps[0] = p1;
    c.reps[1] = p1.dual();
    LocalRep p3;
    switch (id) {
    case CaseId::special_2St:
        p3.kind = RepKind::special;
        p3.unr_pi = d.omega3_pi;
        break;
    case CaseId::translated_PS:
        c.translate = c.translate_dual = true;
        [[fallthrough]];
    case CaseId::unramified_PS:
        p3.kind = RepKind::unramified;
        p3.unr_pi = d.omega3_pi;
        break;
    case CaseId::all_ramified_PS: {
        LocalRep p2;
        p2.kind = RepKind::conductor_one;
        p2.ram_pi = d.omega1p_pi.conj();
        p2.ram_units = {{1, 1}};
        p2.unr_pi = d.omega1p_pi * d.omega1p_pi;
        p2.eps_half = d.eps_half.conj();
        p2.eps_sign = -d.eps_sign;
        c.reps[1] = p2;
        p3.kind = RepKind::conductor_one;
        p3.ram_pi = d.omega1_pi * d.omega1_pi;
        p3.ram_units = {{0, -1}, {1, -1}};
        Gaussian rest = c.reps[0].central().first * p2.central().first * p3.ram_pi;
        p3.unr_pi = rest.inverse();
        p3.eps_half = d.eps_half * d.eps_half;
        p3.eps_sign = 1;
        break;
    }
    }
    c.reps[2] = p3;
    c.validate();
    return c;
}

namespace tables {

inline Number inv_sqrt_q(long q) { return Number(Gaussian(0), Gaussian(Rational(1, q)), q); }

inline Ineq n_ge(long v) { return {-1, 0, -v}; }
inline Ineq n_le(long v) { return {1, 0, v}; }
inline Ineq m_ge(long v) { return {0, -1, -v}; }
inline Ineq m_le(long v) { return {0, 1, v}; }
inline std::vector<Ineq> pinned() { return {m_ge(0), m_le(0)}; }

inline Piece one_dim(Number coeff, Number rn, std::vector<Ineq> reg) {
    Piece p;
    p.coeff = std::move(coeff);
    p.rn = std::move(rn);
    p.region = std::move(reg);
    auto pin = pinned();
    p.region.insert(p.region.end(), pin.begin(), pin.end());
    return p;
}

// (α^{n+s} − β^{n+s})/(α − β) · (√q)^{−(n+t)} on n ≥ lo, β = α^{-1}
inline Series satake_sum(const Gaussian& alpha, long q, long s, long t, long lo, int psi) {
    Number a(alpha), b(alpha.inverse()), iq = inv_sqrt_q(q);
    Number den = (a - b).inverse() * iq.pow(t);
    Piece p = one_dim(den * a.pow(s), a * iq, {n_ge(lo)});
    Piece r = one_dim(-(den * b.pow(s)), b * iq, {n_ge(lo)});
    p.psi = r.psi = psi;
    return {p, r};
}

} // namespace tables

/// @brief W(diag(a,1)) as a lattice function of n = v(a).
inline Series whittaker_diag(const LocalRep& r, long q, bool translated) {
    using namespace tables;
    Number iq = inv_sqrt_q(q);
    switch (r.kind) {
    case RepKind::conductor_one: return {one_dim(Number(1), Number(r.unr_pi) * iq, {n_ge(0)})};
    case RepKind::special: return {one_dim(Number(1), Number(r.unr_pi) * Number(Rational(1, q)), {n_ge(0)})};
    case RepKind::unramified:
        // π(diag(ϖ^{-1},1))W at diag(a,1) is W(diag(ϖ^{-1}a,1))
        return translated ? satake_sum(r.unr_pi, q, 0, -1, 1, 0) : satake_sum(r.unr_pi, q, 1, 0, 0, 0);
    }
    return {};
}

/// @brief W(diag(a,1)·(1 0; 1 1)) in the ψ^{model} Whittaker model.
inline Series whittaker_n1(const LocalRep& r, long q, int model, bool translated) {
    using namespace tables;
    Number iq = inv_sqrt_q(q);
    switch (r.kind) {
    case RepKind::conductor_one: {
        Number eps = Number(r.eps_half) * iq * Number(model < 0 ? r.eps_sign : 1);
        Piece p = one_dim(eps, Number(r.ram_pi) * iq, {n_ge(-1)});
        p.units_n = r.ram_units;
        p.psi = -model;
        return {p};
    }
    case RepKind::special: {
        Piece p = one_dim(Number(Rational(-1, q)), Number(r.unr_pi) * Number(Rational(1, q)), {n_ge(-1)});
        p.psi = -model;
        return {p};
    }
    case RepKind::unramified:
        return translated ? satake_sum(r.unr_pi, q, 2, 1, -1, -model) : whittaker_diag(r, q, false);
    }
    return {};
}

/// @brief Newform of a conductor-one principal series in the induced model
/// at diag(a,1)·(1 0; 1 1), without the constant ζ_F(1)ζ_F(2)^{-1/2}.
inline Series induced_n1(const LocalRep& r, long q) {
    if (r.kind != RepKind::conductor_one) throw std::invalid_argument("induced_n1: needs a conductor-one principal series");
    Piece p = tables::one_dim(Number(1), Number(r.ram_pi) * tables::inv_sqrt_q(q), {});
    p.units_n = r.ram_units;
    return {p};
}

enum class Point { diag, diag_n1 };

/// @brief Table value of a Whittaker function: coeff · σ(u) · ψ(psi·a)
/// where u is the unit part of a.
struct WhittakerValue {
    Number coeff{0};
    UnitChar units;
    int psi = 0;
};

/// @brief Whittaker function of π_{index} (1-based) of the case at
/// diag(a,1) or diag(a,1)·(1 0; 1 1), with v(a) = v_a. The first and third
/// functions are in the ψ-model, the second in the ψ^{-1}-model. Outside the
/// support the value is zero.
inline WhittakerValue whittaker_value(const LocalCase& c, int index, Point pt, long v_a) {
    if (index < 1 || index > 3) throw std::invalid_argument("whittaker_value: index must be 1..3");
    const LocalRep& r = c.reps[index - 1];
    bool tr = index == 3 && c.translate;
    int model = index == 2 ? -1 : 1;
    Series s = pt == Point::diag ? whittaker_diag(r, c.q, tr) : whittaker_n1(r, c.q, model, tr);
    WhittakerValue w;
    for (const auto& p : s)
        if (p.contains(v_a, 0)) {
            w.coeff += p.coeff * p.rn.pow(v_a);
            w.units = p.units_n;
            w.psi = p.psi;
        }
    return w;
}

namespace detail {

inline Series measure_multiplicative_over_abs(long q) {
    // d^×a/|a| on shells
    return {tables::one_dim(Number(1), Number(q), {})};
}

// Σ_n W(n)·W̃(n) over d^×a
inline Number whittaker_pairing(const LocalRep& r, long q, bool translated) {
    return sum_lattice(whittaker_diag(r, q, translated) * whittaker_diag(r.dual(), q, translated), q);
}

// one side of the Rankin–Selberg product without the constant prefactor
inline Number rankin_selberg_side(const std::array<LocalRep, 3>& reps, long q, int side, bool translated) {
    auto A = hu_weights(q, 1);
    // j = 1: the point (1 0; ϖ 1) lies in K_1(𝔭); the induced newform vanishes on B·K_1(𝔭)
    Series at_identity{};
    Series at_n1 = induced_n1(reps[0], q) * whittaker_n1(reps[1], q, -side, false) *
                   whittaker_n1(reps[2], q, side, translated) * measure_multiplicative_over_abs(q);
    return Number(A[0]) * sum_lattice(at_n1, q) + Number(A[1]) * sum_lattice(at_identity, q);
}

} // namespace detail

/// @brief Square of the constant ζ_F(1)^{1/2}·ζ_F(1)ζ_F(2)^{-1/2} dropped from
/// each Rankin–Selberg integral.
inline Rational rankin_selberg_constant_sq(long q) {
    Rational z1 = zeta_local(q, 1), z2 = zeta_local(q, 2);
    return z1 * z1 * z1 / z2;
}

/// @brief I(φ⊗φ̃) as the product of the two local Rankin–Selberg integrals.
inline Number period_rankin_selberg(const LocalCase& c) {
    c.validate();
    std::array<LocalRep, 3> dual{c.reps[0].dual(), c.reps[1].dual(), c.reps[2].dual()};
    Number l = detail::rankin_selberg_side(c.reps, c.q, 1, c.translate);
    Number lt = detail::rankin_selberg_side(dual, c.q, -1, c.translate_dual);
    return Number(rankin_selberg_constant_sq(c.q)) * l * lt;
}

/// @brief ⟨φ, φ̃⟩ as the product of the local Whittaker pairings.
inline Number newform_pairing(const LocalCase& c) {
    Number v(1);
    for (int j = 0; j < 3; ++j) {
        bool tr = j == 2 && c.translate && c.translate_dual;
        v *= detail::whittaker_pairing(c.reps[j], c.q, tr);
    }
    return v;
}

/// @brief L-factor normalisation L(1,ad π₁)L(1,ad π₂)L(1,ad π₃) /
/// (ζ_F(2)² L(1/2, π₁⊗π₂⊗π₃)).
inline Number l_factor_normalisation(const LocalCase& c) {
    const long q = c.q;
    Number iq = tables::inv_sqrt_q(q), one(1), q1(Rational(1, q));
    auto local_L = [&](const Number& val, const Number& x) { return one / (one - val * x); };

    struct Constituent {
        Number at_pi;
        UnitChar units;
    };
    auto constituents = [&](const LocalRep& r) -> std::vector<Constituent> {
        switch (r.kind) {
        case RepKind::conductor_one: return {{Number(r.ram_pi), r.ram_units}, {Number(r.unr_pi), {}}};
        case RepKind::unramified: return {{Number(r.unr_pi), {}}, {Number(r.unr_pi.inverse()), {}}};
        case RepKind::special: throw std::invalid_argument("l_factor_normalisation: special first or second factor");
        }
        return {};
    };

    Number triple(1);
    for (const auto& a : constituents(c.reps[0]))
        for (const auto& b : constituents(c.reps[1])) {
            Number ab = a.at_pi * b.at_pi;
            UnitChar u = unit_product(a.units, b.units);
            const LocalRep& r3 = c.reps[2];
            if (r3.kind == RepKind::special) {
                // χ ⊗ ωSt has L(s) = L(s + 1/2, χω) for unramified χω
                if (u.empty()) triple *= local_L(ab * Number(r3.unr_pi), q1);
            } else {
                for (const auto& d : constituents(r3))
                    if (unit_product(u, d.units).empty()) triple *= local_L(ab * d.at_pi, iq);
            }
        }

    Number ad(1);
    for (const auto& r : c.reps) {
        Number z1(zeta_local(q, 1));
        switch (r.kind) {
        case RepKind::conductor_one: ad *= z1; break;
        case RepKind::special: ad *= Number(zeta_local(q, 2)); break;
        case RepKind::unramified: {
            Number a2 = Number(r.unr_pi * r.unr_pi);
            ad *= z1 * local_L(a2, q1) * local_L(a2.inverse(), q1);
            break;
        }
        }
    }
    Rational z2 = zeta_local(q, 2);
    return ad / (Number(z2 * z2) * triple);
}

/// @brief I′ by the Rankin–Selberg route.
inline Number local_constant_rankin_selberg(const LocalCase& c) {
    return l_factor_normalisation(c) * period_rankin_selberg(c) / newform_pairing(c);
}

namespace detail {

// Linear form an·n + am·m + a0 in the two valuations.
struct Form {
    int an, am;
    long a0;
};

// Spherical matrix coefficient Φ(r) = C₊X^r + C₋Y^r with
// r = det − 2·min(candidates), split into regions by the active minimum.
inline Series spherical_coefficient(const Gaussian& alpha, long q, Form det, const std::vector<Form>& cands) {
    Number a(alpha), a2 = Number(alpha * alpha), one(1), iq = tables::inv_sqrt_q(q), q1(Rational(1, q));
    Number norm = one / (one + q1);
    Number cp = norm * (one - a2.inverse() * q1) / (one - a2.inverse());
    Number cm = norm * (one - a2 * q1) / (one - a2);
    Number X = a * iq, Y = a.inverse() * iq;
    Series out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        std::vector<Ineq> reg;
        for (std::size_t j = 0; j < cands.size(); ++j) {
            if (j == i) continue;
            long bound = j < i ? -1 : 0; // ties go to the first candidate
            reg.push_back({cands[i].an - cands[j].an, cands[i].am - cands[j].am, cands[j].a0 - cands[i].a0 + bound});
        }
        int rn = det.an - 2 * cands[i].an, rm = det.am - 2 * cands[i].am;
        long r0 = det.a0 - 2 * cands[i].a0;
        for (auto [C, Z] : {std::pair{cp, X}, std::pair{cm, Y}}) {
            Piece p;
            p.coeff = C * Z.pow(r0);
            p.rn = Z.pow(rn);
            p.rm = Z.pow(rm);
            p.region = reg;
            out.push_back(p);
        }
    }
    return out;
}

} // namespace detail

/// @brief Normalised matrix coefficient Φ_π on b = (a x; 0 1) (second
/// variable v(x)) or on b·(1 0; 1 1) (second variable v of the upper-left
/// entry a + x). Translation flags act as g ↦ h^{-1}gh, gh or h^{-1}g with
/// h = diag(ϖ^{-1}, 1).
inline Series matrix_coefficient(const LocalRep& r, long q, Point pt, bool translate = false,
                                 bool translate_dual = false) {
    using tables::inv_sqrt_q;
    Number iq = inv_sqrt_q(q), sq = Number::sqrt_q(q), qq(q), q1(Rational(1, q));
    auto piece = [](Number c, Number rn, Number rm, std::vector<Ineq> reg) {
        Piece p;
        p.coeff = std::move(c);
        p.rn = std::move(rn);
        p.rm = std::move(rm);
        p.region = std::move(reg);
        return p;
    };
    switch (r.kind) {
    case RepKind::conductor_one: {
        Number s1(r.unr_pi);
        if (pt == Point::diag)
            return {piece(1, s1 * sq, 1, {{1, -1, 0}, tables::n_le(-1)}),
                    piece(1, s1 * iq, 1, {tables::n_ge(0), tables::m_ge(0)})};
        Piece p = piece(1, Number(r.ram_pi) * iq, Number(r.unr_pi / r.ram_pi) * qq, {{-1, 1, 0}, tables::m_le(-1)});
        p.units_n = r.ram_units;
        p.units_m = unit_inverse(r.ram_units);
        return {p};
    }
    case RepKind::special: {
        Number w(r.unr_pi);
        if (pt == Point::diag)
            return {piece(-qq, w * q1, qq * qq, {{-1, 1, -1}, tables::m_le(-1)}),
                    piece(1, w * qq, 1, {{1, -1, 0}, tables::n_le(-1)}),
                    piece(1, w * q1, 1, {tables::n_ge(0), tables::m_ge(0)})};
        return {piece(1, w * q1, qq * qq, {{-1, 1, 0}, tables::m_le(-1)}),
                piece(-qq, w * qq, 1, {{1, -1, -1}, tables::n_le(-1)}),
                piece(-q1, w * q1, 1, {tables::n_ge(0), tables::m_ge(0)})};
    }
    case RepKind::unramified: {
        using detail::Form;
        const int mode = (translate ? 1 : 0) + (translate_dual ? 2 : 0);
        Form det{1, 0, mode == 1 ? -1L : (mode == 2 ? 1L : 0L)};
        std::vector<Form> c;
        if (pt == Point::diag) {
            switch (mode) {
            case 0: c = {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}; break;
            case 1: c = {{1, 0, -1}, {0, 1, 0}, {0, 0, 0}}; break;
            case 2: c = {{1, 0, 1}, {0, 1, 1}, {0, 0, 0}}; break;
            default: c = {{1, 0, 0}, {0, 1, 1}, {0, 0, 0}}; break;
            }
        } else {
            switch (mode) {
            case 0: c = {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}; break;
            case 1: c = {{0, 1, -1}, {1, 0, 0}, {0, 0, -1}}; break;
            case 2: c = {{0, 1, 1}, {1, 0, 1}, {0, 0, 0}}; break;
            default: c = {{0, 1, 0}, {1, 0, 1}, {0, 0, -1}}; break;
            }
        }
        return detail::spherical_coefficient(r.unr_pi, q, det, c);
    }
    }
    return {};
}

/// @brief I(φ⊗φ̃)/⟨φ,φ̃⟩ as the integral of the product of the three
/// normalised matrix coefficients over Z\GL₂, reduced to two Borel integrals.
inline Number period_matrix_coefficients(const LocalCase& c) {
    c.validate();
    const long q = c.q;
    auto A = hu_weights(q, 1);
    Piece meas;
    meas.coeff = Number(1) - Number(Rational(1, q)); // |a|^{-1} d^×a dx on shells
    meas.rn = Number(q);
    meas.rm = Number(Rational(1, q));
    Number out(0);
    for (auto [pt, w] : {std::pair{Point::diag_n1, A[0]}, std::pair{Point::diag, A[1]}}) {
        Series s = matrix_coefficient(c.reps[0], q, pt) * matrix_coefficient(c.reps[1], q, pt) *
                   matrix_coefficient(c.reps[2], q, pt, c.translate, c.translate_dual) * Series{meas};
        out += Number(w) * sum_lattice(s, q);
    }
    return out;
}

/// @brief I′ by the matrix-coefficient route.
inline Number local_constant(const LocalCase& c) { return l_factor_normalisation(c) * period_matrix_coefficients(c); }

/// @brief Closed form claimed for the case: q^{-1}(1 + q^{-1}) for the
/// special and all-ramified cases, q^{-1} for the unramified ones.
inline Rational expected_value(const LocalCase& c) {
    Rational iq(1, c.q);
    switch (c.id) {
    case CaseId::special_2St:
    case CaseId::all_ramified_PS: return iq * (1 + iq);
    case CaseId::unramified_PS:
    case CaseId::translated_PS: return iq;
    }
    return 0;
}

/// @brief One row of the local-constant table.
struct TableRow {
    CaseId id;
    long q;
    Number matrix_coefficients, rankin_selberg;
    Rational expected;
    bool matches() const {
        return matrix_coefficients == Number(expected) && rankin_selberg == Number(expected);
    }
};

inline TableRow table_row(CaseId id, long q, const CharacterData& d = {}) {
    LocalCase c = make_case(id, q, d);
    return {id, q, local_constant(c), local_constant_rankin_selberg(c), expected_value(c)};
}

} // namespace dihedral::locconst
