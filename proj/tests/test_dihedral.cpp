#include <dihedral/dihedral.hpp>

#include <gtest/gtest.h>

using namespace dihedral;

namespace {

Real50 lambda_by_definition(const Grossenchar& c, long long n) {
    Real50 s = 0;
    for (auto& I : ideals_of_norm(c.field, n)) s += c.psi(I.generator).real();
    return s;
}

} // namespace

TEST(Dihedral, CharacterValidation) {
    auto F = make_field(5);
    EXPECT_NO_THROW(make_character(F, 1, 0, 0));
    EXPECT_THROW(make_character(F, 0, 0, 0), std::invalid_argument);
    EXPECT_THROW(make_character(F, 1, 1, 0), std::invalid_argument);
    auto c = make_character(F, 1, 0, 0);
    auto z = c.psi({2, 0});
    EXPECT_LT(boost::multiprecision::abs(z.real() - 1), Real50("1e-45"));
    EXPECT_LT(boost::multiprecision::abs(z.imag()), Real50("1e-45"));
    // unit invariance
    auto w = c.psi(F.eps);
    EXPECT_LT(boost::multiprecision::abs(w.real() - 1), Real50("1e-40"));
    // κ = 1 allowed when N(ε) = +1
    auto F21 = make_field(21);
    EXPECT_NO_THROW(make_character(F21, 1, 1, 0));
}

TEST(Dihedral, SpectralParameter) {
    auto g1 = make_dihedral(5, 1, 0, 1000);
    auto g2 = make_dihedral(5, 2, 0, 1000);
    EXPECT_NEAR(g1.t(), 6.5285, 1e-4);
    Real50 pi = boost::math::constants::pi<Real50>();
    EXPECT_LT(boost::multiprecision::abs(g1.t_g() - pi / Real50("0.481211825059603447497758913424368423135184334385660519661")),
              Real50("1e-40"));
    EXPECT_LT(boost::multiprecision::abs(g2.t_g() - 2 * g1.t_g()), Real50("1e-40"));
    EXPECT_EQ(g1.parity(), 1);
    auto g13 = make_dihedral(13, 1, 0, 1000);
    Real50 e13 = (3 + boost::multiprecision::sqrt(Real50(13))) / 2;
    EXPECT_LT(boost::multiprecision::abs(g13.t_g() - pi / boost::multiprecision::log(e13)), Real50("1e-40"));
}

TEST(Dihedral, ExampleEigenvalues) {
    auto g = make_dihedral(5, 1, 0, 1000);
    EXPECT_EQ(g.hecke_eigenvalue(2), 0);
    EXPECT_LT(abs(g.hecke_eigenvalue(4) - 1), Quad(1e-30));
    EXPECT_LT(abs(g.hecke_eigenvalue(5) - 1), Quad(1e-30));
    EXPECT_LT(abs(g.hecke_eigenvalue(25) - 1), Quad(1e-30));
}

TEST(Dihedral, TableMatchesIdealSums) {
    for (long long D : {5, 13, 17}) {
        for (long long ell : {1, 2}) {
            auto c = make_character(make_field(D), ell, 0);
            auto g = build_form(c, 2000);
            for (long long n = 1; n <= 2000; n += (n < 400 ? 1 : 7)) {
                Real50 ref = lambda_by_definition(c, n);
                ASSERT_LT(boost::multiprecision::abs(Real50(g.hecke_eigenvalue(n)) - ref), Real50("1e-25"))
                    << "D=" << D << " ell=" << ell << " n=" << n;
            }
        }
    }
}

TEST(Dihedral, KappaOneBranchSatisfiesHecke) {
    auto g = build_form(make_character(make_field(21), 1, 1), 3000);
    for (long long m = 1; m <= 50; ++m)
        for (long long n = 1; n <= 50; ++n) {
            Quad rhs = 0;
            for (long long d : arith::divisors(std::gcd(m, n))) rhs += chi(g.field(), d) * g.hecke_eigenvalue(m * n / (d * d));
            ASSERT_LT(abs(g.hecke_eigenvalue(m) * g.hecke_eigenvalue(n) - rhs), Quad(1e-25));
        }
}

TEST(Dihedral, LargeIndicesUseFactorization) {
    auto g = make_dihedral(13, 1, 0, 1000);
    long long n = 1000003ll * 17;
    Quad direct = g.prime_power(1000003, 1) * g.prime_power(17, 1);
    EXPECT_LT(abs(g.hecke_eigenvalue(n) - direct), Quad(1e-30));
}

TEST(Dihedral, JsonExport) {
    auto g = make_dihedral(5, 1, 0, 200);
    auto j = g.to_json(10);
    EXPECT_EQ(j["D"], 5);
    EXPECT_EQ(j["coeffs"].size(), 10u);
    EXPECT_EQ(j["coeffs"][0][0], 1);
    EXPECT_TRUE(j["t_g"].is_string());
}
