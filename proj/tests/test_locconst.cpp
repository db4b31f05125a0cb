#include <dihedral/locconst.hpp>

#include <gtest/gtest.h>

#include <complex>
#include <iostream>
#include <random>

using namespace dihedral::locconst;
using cd = std::complex<double>;

namespace {

const CaseId kAll[] = {CaseId::special_2St, CaseId::unramified_PS, CaseId::translated_PS, CaseId::all_ramified_PS};

CharacterData data_for(CaseId id) {
    CharacterData d;
    if (id == CaseId::unramified_PS || id == CaseId::translated_PS) d.omega3_pi = Gaussian(Rational(5, 4));
    return d;
}

CharacterData other_phases(CaseId id) {
    CharacterData d = data_for(id);
    d.omega1_pi = Gaussian(Rational(-7, 25), Rational(24, 25));
    d.omega1p_pi = Gaussian(Rational(20, 29), Rational(-21, 29));
    d.eps_half = Gaussian(Rational(-12, 13), Rational(5, 13));
    d.eps_sign = -1;
    return d;
}

// fraction of GL₂(Z/p^m) whose lower-left entry has valuation j (j = m: divisible by p^m)
std::vector<Rational> coset_fractions(long p, int m) {
    long pm = 1;
    for (int i = 0; i < m; ++i) pm *= p;
    std::vector<long> cnt(m + 1, 0);
    long total = 0;
    for (long a = 0; a < pm; ++a)
        for (long b = 0; b < pm; ++b)
            for (long c = 0; c < pm; ++c)
                for (long d = 0; d < pm; ++d) {
                    long det = ((a * d - b * c) % pm + pm) % pm;
                    if (det % p == 0) continue;
                    int v = 0;
                    long cc = c;
                    while (v < m && cc % p == 0) { cc /= p; ++v; }
                    ++cnt[v];
                    ++total;
                }
    std::vector<Rational> f;
    for (long x : cnt) f.emplace_back(x, total);
    return f;
}

cd num(const Number& x) { return x.to_complex(); }

cd eval_double(const Series& s, long n, long m = 0) {
    cd v = 0;
    for (const auto& p : s)
        if (p.contains(n, m)) v += num(p.coeff) * std::pow(num(p.rn), double(n)) * std::pow(num(p.rm), double(m));
    return v;
}

// Σ_j W(j+n)·W̃(j)·(shell average of ψ at valuation j+m), divided by Σ_j W(j)W̃(j)
cd shell_coefficient(const Series& w, const Series& wt, long q, long n, long m, int jmax = 400) {
    cd num_sum = 0, den = 0;
    for (long j = -5; j < jmax; ++j) {
        cd a = eval_double(w, j + n), b = eval_double(wt, j);
        double psi = j + m >= 0 ? 1.0 : (j + m == -1 ? -1.0 / (q - 1) : 0.0);
        num_sum += a * b * psi;
        den += eval_double(w, j) * b;
    }
    return num_sum / den;
}

long vp(Rational x, long p) {
    if (x == 0) return 1000;
    using boost::multiprecision::cpp_int;
    cpp_int n = boost::multiprecision::numerator(x), d = boost::multiprecision::denominator(x);
    long v = 0;
    while (n % p == 0) { n /= p; ++v; }
    while (d % p == 0) { d /= p; --v; }
    return v;
}

Rational ppow(long p, long e) {
    Rational r = 1;
    for (long i = 0; i < std::labs(e); ++i) r *= p;
    return e < 0 ? 1 / r : r;
}

// Macdonald's spherical function at the Cartan exponent r
cd spherical_at(const Gaussian& alpha, long q, long r) {
    cd a = alpha.to_complex(), a2 = a * a;
    double iq = 1.0 / q;
    cd cp = (1.0 - iq / a2) / ((1.0 + iq) * (1.0 - 1.0 / a2));
    cd cm = (1.0 - a2 * iq) / ((1.0 + iq) * (1.0 - a2));
    double s = std::pow(q, -0.5 * r);
    return s * (cp * std::pow(a, r) + cm * std::pow(a, -r));
}

} // namespace

TEST(HuWeights, ExamplesAndCosetCount) {
    EXPECT_EQ(hu_weights(2, 1), (std::vector<Rational>{Rational(2, 3), Rational(1, 3)}));
    EXPECT_EQ(hu_weights(3, 1), (std::vector<Rational>{Rational(3, 4), Rational(1, 4)}));
    for (long q = 2; q <= 11; ++q)
        for (int m = 1; m <= 4; ++m) {
            Rational s = 0;
            for (auto& a : hu_weights(q, m)) s += a;
            EXPECT_EQ(s, 1) << q << " " << m;
        }
    for (auto [p, m] : {std::pair{2L, 1}, {2L, 2}, {2L, 3}, {3L, 1}, {3L, 2}, {5L, 1}})
        EXPECT_EQ(hu_weights(p, m), coset_fractions(p, m)) << p << "^" << m;
    EXPECT_THROW(hu_weights(2, 0), std::invalid_argument);
}

TEST(LatticeSum, AgreesWithBoxSums) {
    const long q = 3;
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> co(-1, 1), cc(-2, 2);
    const Number ratios[] = {Number(Rational(1, 3)), Number(Rational(-1, 2)), Number(Gaussian(Rational(1, 5), Rational(2, 5))),
                             Number::sqrt_q(q) * Number(Rational(1, 4))};
    int tested = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Piece p;
        p.coeff = Number(Rational(trial % 7 + 1, 3));
        p.rn = ratios[trial % 4];
        p.rm = ratios[(trial / 4) % 4];
        // a bounded box plus one or two random cuts
        p.region = {{1, 0, 6}, {-1, 0, 6}, {0, 1, 6}, {0, -1, 6}};
        for (int k = 0; k < 1 + trial % 2; ++k) p.region.push_back({co(rng), co(rng), static_cast<long>(cc(rng))});
        cd brute = 0;
        for (long n = -6; n <= 6; ++n)
            for (long m = -6; m <= 6; ++m)
                if (p.contains(n, m)) brute += num(p.coeff * p.rn.pow(n) * p.rm.pow(m));
        cd exact = num(sum_lattice({p}, q));
        EXPECT_LT(std::abs(exact - brute), 1e-10 * (1 + std::abs(brute))) << trial;
        ++tested;
    }
    EXPECT_EQ(tested, 60);

    // unbounded cones against long truncations
    struct Cone {
        std::vector<Ineq> reg;
        Number rn, rm;
    };
    const std::vector<Cone> cones{
        {{{1, -1, 0}, {1, 0, -1}}, Number(5), Number(Rational(1, 3))},        // n ≤ min(m, −1)
        {{{-1, 1, -1}, {0, 1, -1}}, Number(Rational(1, 2)), Number(5)},       // m ≤ min(n − 1, −1)
        {{{0, -1, 0}, {-1, 0, 0}}, Number(Rational(1, 2)), Number(Rational(-1, 3))}};
    for (const auto& cone : cones) {
        Piece p;
        p.rn = cone.rn;
        p.rm = cone.rm;
        p.region = cone.reg;
        cd brute = 0;
        for (long n = -80; n <= 80; ++n)
            for (long m = -80; m <= 80; ++m)
                if (p.contains(n, m)) brute += num(p.rn.pow(n) * p.rm.pow(m));
        EXPECT_LT(std::abs(num(sum_lattice({p}, q)) - brute), 1e-12 * std::abs(brute));
    }

    Piece div;
    div.rn = Number(Gaussian(Rational(3, 5), Rational(4, 5)));
    div.region = {{-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
    EXPECT_THROW(sum_lattice({div}, q), DivergentSeries);
}

TEST(Whittaker, TableValues) {
    for (long q : {2L, 5L}) {
        CharacterData d;
        d.omega3_pi = Gaussian(-1);
        LocalCase c = make_case(CaseId::special_2St, q, d);
        auto w = whittaker_value(c, 3, Point::diag, 0);
        EXPECT_EQ(w.coeff, Number(1));
        EXPECT_EQ(whittaker_value(c, 3, Point::diag, 2).coeff, Number(Rational(1, q * q)));
        EXPECT_TRUE(whittaker_value(c, 1, Point::diag, -1).coeff.is_zero());
        EXPECT_TRUE(whittaker_value(c, 3, Point::diag_n1, -2).coeff.is_zero());
        auto s = whittaker_value(c, 3, Point::diag_n1, -1);
        // −(1/q)·ω₃(a)·|a| with |a| = q and ω₃(ϖ) = −1
        EXPECT_EQ(s.coeff, Number(1));
        EXPECT_EQ(s.psi, -1);
        auto p1 = whittaker_value(c, 1, Point::diag, 3);
        EXPECT_EQ(p1.coeff, Number(d.omega1p_pi).pow(3) * Number::sqrt_q(q).pow(-3));
        auto n1 = whittaker_value(c, 1, Point::diag_n1, -1);
        EXPECT_FALSE(n1.units.empty());
        EXPECT_EQ(n1.psi, -1);
        EXPECT_EQ(whittaker_value(c, 2, Point::diag_n1, 0).psi, 1);
    }
    // unramified: Σ_{m=0}^{v} α^m α^{m−v} q^{−v/2}
    LocalCase u = make_case(CaseId::unramified_PS, 3, data_for(CaseId::unramified_PS));
    Number a(Gaussian(Rational(5, 4)));
    for (long v = 0; v <= 4; ++v) {
        Number s(0);
        for (long m = 0; m <= v; ++m) s += a.pow(2 * m - v);
        EXPECT_EQ(whittaker_value(u, 3, Point::diag, v).coeff, s * Number::sqrt_q(3).pow(-v));
    }
    LocalCase t = make_case(CaseId::translated_PS, 3, data_for(CaseId::translated_PS));
    for (long v = -1; v <= 3; ++v) {
        Number s(0);
        for (long m = 0; m <= v + 1; ++m) s += a.pow(2 * m - v - 1);
        EXPECT_EQ(whittaker_value(t, 3, Point::diag_n1, v).coeff, s * Number::sqrt_q(3).pow(-(v + 1)));
        EXPECT_EQ(whittaker_value(t, 3, Point::diag, v + 1).coeff, whittaker_value(u, 3, Point::diag, v).coeff);
    }
}

TEST(Whittaker, PairingsAgreeWithClosedForms) {
    for (long q : {2L, 3L, 7L}) {
        Rational z1 = zeta_local(q, 1), z2 = zeta_local(q, 2);
        LocalCase c = make_case(CaseId::special_2St, q);
        EXPECT_EQ(newform_pairing(c), Number(z1 * z1 * z2));
        for (Gaussian al : {Gaussian(Rational(5, 4)), Gaussian(Rational(3, 5), Rational(4, 5))}) {
            CharacterData d;
            d.omega3_pi = al;
            LocalCase u = make_case(CaseId::unramified_PS, q, d);
            Number a2(al * al), q1(Rational(1, q)), one(1);
            Number lad = Number(z1) / ((one - a2 * q1) * (one - a2.inverse() * q1));
            EXPECT_EQ(newform_pairing(u), Number(z1 * z1) * Number(z1) * lad / Number(z2));
            LocalCase t = make_case(CaseId::translated_PS, q, d);
            EXPECT_EQ(newform_pairing(t), newform_pairing(u));
        }
    }
}

TEST(MatrixCoefficient, BorelTablesMatchShellSums) {
    for (long q : {2L, 3L}) {
        LocalCase st = make_case(CaseId::special_2St, q);
        for (int j : {0, 1, 2}) {
            const LocalRep& r = st.reps[j];
            Series w = whittaker_diag(r, q, false), wt = whittaker_diag(r.dual(), q, false);
            Series phi = matrix_coefficient(r, q, Point::diag);
            for (long n = -4; n <= 4; ++n)
                for (long m = -4; m <= 4; ++m) {
                    cd want = shell_coefficient(w, wt, q, n, m);
                    cd got = num(evaluate(phi, n, m));
                    EXPECT_LT(std::abs(got - want), 1e-12) << "rep " << j << " q " << q << " (" << n << "," << m << ")";
                }
        }
        for (Gaussian al : {Gaussian(Rational(5, 4)), Gaussian(Rational(3, 5), Rational(4, 5)), Gaussian(Rational(0), Rational(1))}) {
            LocalRep r;
            r.kind = RepKind::unramified;
            r.unr_pi = al;
            Series w = whittaker_diag(r, q, false), wt = whittaker_diag(r.dual(), q, false);
            Series wh = whittaker_diag(r, q, true), wth = whittaker_diag(r.dual(), q, true);
            Series plain = matrix_coefficient(r, q, Point::diag);
            Series both = matrix_coefficient(r, q, Point::diag, true, true);
            Series right = matrix_coefficient(r, q, Point::diag, true, false);
            Series left = matrix_coefficient(r, q, Point::diag, false, true);
            for (long n = -4; n <= 4; ++n)
                for (long m = -4; m <= 4; ++m) {
                    EXPECT_LT(std::abs(num(evaluate(plain, n, m)) - shell_coefficient(w, wt, q, n, m)), 1e-12);
                    // h^{-1} b h = (a, ϖx; 0, 1); b h = (aϖ^{-1}, x; 0, 1); h^{-1} b = (ϖa, ϖx; 0, 1)
                    EXPECT_LT(std::abs(num(evaluate(both, n, m)) - shell_coefficient(w, wt, q, n, m + 1)), 1e-12);
                    EXPECT_LT(std::abs(num(evaluate(right, n, m)) - shell_coefficient(w, wt, q, n - 1, m)), 1e-12);
                    EXPECT_LT(std::abs(num(evaluate(left, n, m)) - shell_coefficient(w, wt, q, n + 1, m + 1)), 1e-12);
                    // the same coefficient from the translated Whittaker functions directly
                    EXPECT_LT(std::abs(num(evaluate(both, n, m)) - shell_coefficient(wh, wth, q, n, m)), 1e-12);
                }
        }
    }
}

TEST(MatrixCoefficient, SphericalOnUnipotentTranslateMatchesCartan) {
    // explicit p-adic points b·(1 0; 1 1) with random units, Cartan exponent from entry valuations
    std::mt19937 rng(11);
    for (long p : {2L, 3L}) {
        LocalRep r;
        r.kind = RepKind::unramified;
        r.unr_pi = Gaussian(Rational(3, 5), Rational(4, 5));
        const Rational P(p);
        for (int mode = 0; mode < 4; ++mode) {
            bool tr = mode & 1, td = mode & 2;
            Series phi = matrix_coefficient(r, p, Point::diag_n1, tr, td);
            std::uniform_int_distribution<long> unit(1, 40);
            for (long n = -3; n <= 3; ++n)
                for (long k = -3; k <= 3; ++k)
                    for (int trial = 0; trial < 6; ++trial) {
                        long u1 = unit(rng), u2 = unit(rng);
                        if (u1 % p == 0) ++u1;
                        if (u2 % p == 0) ++u2;
                        Rational a = ppow(p, n) * u1, y = ppow(p, k) * u2, x = y - a;
                        // g = (y, x; 1, 1), then h^{-1} g h etc. with h = diag(1/p, 1)
                        Rational A = y, B = x, C = 1, D = 1;
                        if (tr) { A /= P; C /= P; }
                        if (td) { A *= P; B *= P; }
                        long det = vp(A * D - B * C, p);
                        long mn = std::min({vp(A, p), vp(B, p), vp(C, p), vp(D, p)});
                        cd want = spherical_at(r.unr_pi, p, det - 2 * mn);
                        EXPECT_LT(std::abs(num(evaluate(phi, n, k)) - want), 1e-12)
                            << "mode " << mode << " p " << p << " n " << n << " k " << k;
                    }
        }
        // the spherical function itself against shell sums on the diagonal
        Series w = whittaker_diag(r, p, false), wt = whittaker_diag(r.dual(), p, false);
        for (long rr = 0; rr <= 6; ++rr)
            EXPECT_LT(std::abs(spherical_at(r.unr_pi, p, rr) - shell_coefficient(w, wt, p, rr, 0)), 1e-12);
    }
}

TEST(LocalConstant, TwoRoutesAndClosedForms) {
    for (auto id : kAll)
        for (long q : {2L, 3L, 5L, 7L}) {
            LocalCase c = make_case(id, q, data_for(id));
            Number mc = local_constant(c), rs = local_constant_rankin_selberg(c);
            EXPECT_EQ(mc, rs) << to_string(id) << " q=" << q;
            ASSERT_TRUE(mc.is_rational()) << mc.to_string();
            if (id == CaseId::all_ramified_PS) {
                std::cout << "[conjecture check] all_ramified_PS q=" << q << " I'=" << mc.to_string() << " claimed "
                          << expected_value(c) << (mc == Number(expected_value(c)) ? " agree" : " DISAGREE") << "\n";
                continue;
            }
            EXPECT_EQ(mc.to_rational(), expected_value(c)) << to_string(id) << " q=" << q;
        }
    EXPECT_EQ(local_constant(make_case(CaseId::special_2St, 2)).to_rational(), Rational(3, 4));
    EXPECT_EQ(local_constant(make_case(CaseId::special_2St, 5)).to_rational(), Rational(6, 25));
    CharacterData unit;
    unit.omega3_pi = Gaussian(Rational(-4, 5), Rational(3, 5));
    EXPECT_EQ(local_constant(make_case(CaseId::unramified_PS, 2, unit)).to_rational(), Rational(1, 2));
    // prime powers, including a square residue cardinality
    for (long q : {4L, 8L, 9L}) {
        EXPECT_EQ(local_constant(make_case(CaseId::special_2St, q)).to_rational(), Rational(q + 1, q * q));
        EXPECT_EQ(local_constant_rankin_selberg(make_case(CaseId::unramified_PS, q, unit)).to_rational(), Rational(1, q));
    }
}

TEST(LocalConstant, IndependentOfUnitPhases) {
    for (auto id : kAll)
        for (long q : {2L, 3L, 5L, 7L}) {
            LocalCase a = make_case(id, q, data_for(id)), b = make_case(id, q, other_phases(id));
            EXPECT_EQ(local_constant(a), local_constant(b));
            EXPECT_EQ(local_constant_rankin_selberg(a), local_constant_rankin_selberg(b));
        }
    // the unnormalised period does see the unramified parameter
    CharacterData d1, d2;
    d1.omega3_pi = Gaussian(Rational(5, 4));
    d2.omega3_pi = Gaussian(Rational(3, 5), Rational(4, 5));
    EXPECT_FALSE(period_matrix_coefficients(make_case(CaseId::unramified_PS, 3, d1)) ==
                 period_matrix_coefficients(make_case(CaseId::unramified_PS, 3, d2)));
    CharacterData neg;
    neg.omega3_pi = Gaussian(-1);
    EXPECT_EQ(local_constant(make_case(CaseId::special_2St, 3, neg)).to_rational(), Rational(4, 9));
}

TEST(LocalConstant, TranslatedEitherOrBoth) {
    for (long q : {2L, 3L, 5L, 7L}) {
        LocalCase base = make_case(CaseId::unramified_PS, q, data_for(CaseId::unramified_PS));
        Number ref = local_constant(base);
        for (auto [t, td] : {std::pair{true, false}, {false, true}, {true, true}}) {
            LocalCase c = base;
            c.translate = t;
            c.translate_dual = td;
            EXPECT_EQ(local_constant(c), ref) << q << t << td;
            EXPECT_EQ(local_constant_rankin_selberg(c), ref);
        }
    }
}

TEST(LocalConstant, RejectsInvalidData) {
    CharacterData d;
    d.omega3_pi = Gaussian(2);
    EXPECT_THROW(make_case(CaseId::unramified_PS, 3, d), DivergentSeries);
    d.omega3_pi = Gaussian(1);
    EXPECT_THROW(make_case(CaseId::unramified_PS, 3, d), std::invalid_argument);
    d.omega3_pi = Gaussian(Rational(1, 2));
    EXPECT_THROW(make_case(CaseId::special_2St, 3, d), std::invalid_argument);
    LocalCase c = make_case(CaseId::special_2St, 3);
    c.reps[1].unr_pi = Gaussian(Rational(0), Rational(1));
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = make_case(CaseId::special_2St, 3);
    c.translate = true;
    EXPECT_THROW(local_constant(c), std::invalid_argument);
    EXPECT_EQ(case_from_string("translated_PS"), CaseId::translated_PS);
    EXPECT_THROW(case_from_string("supercuspidal"), std::invalid_argument);
}
