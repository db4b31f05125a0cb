#include <dihedral/special.hpp>

#include <boost/math/special_functions/zeta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace dihedral;
using namespace dihedral::special;
namespace mp = boost::multiprecision;

namespace {

using R100 = mp::cpp_bin_float_100;
using C100 = mp::cpp_complex_100;

// log Γ(1+z) = -γz + Σ_{k≥2} (-1)^k ζ(k) z^k / k for |z| < 1
Complex50 log_gamma_taylor(const Complex50& z) {
    Real50 g = boost::math::constants::euler<Real50>();
    Complex50 s = -g * z, zk = z;
    for (int k = 2; k < 400; ++k) {
        zk *= z;
        Real50 zeta = boost::math::zeta(Real50(k));
        Complex50 term = zk * zeta / Real50(k);
        s += (k % 2 ? -term : term);
        if (mp::abs(term) < Real50("1e-45")) break;
    }
    return s;
}

// scaled K from the high-precision power series: -π e^{πt/2} Im I_{it}(x) / sinh(πt)
double k_oracle(double t, double x) {
    R100 T(t), X(x);
    C100 nu(0, T);
    C100 half = C100(X / 2, 0);
    C100 term = mp::exp(nu * mp::log(half) - log_gamma(nu + C100(1)));
    C100 sum = term;
    R100 q = X * X / 4;
    for (int k = 1; k < 2000; ++k) {
        term *= C100(q, 0) / (C100(k, 0) * (nu + C100(k, 0)));
        sum += term;
        if (mp::abs(term) < R100("1e-90") * mp::abs(sum) && k > x) break;
    }
    R100 pi = boost::math::constants::pi<R100>();
    R100 v = -pi * mp::exp(pi * T / 2) * sum.imag() / mp::sinh(pi * T);
    return v.convert_to<double>();
}

} // namespace

TEST(LogGamma, TrivialValues) {
    EXPECT_NEAR(std::abs(lgamma_c(0.5) - 0.5 * std::log(kPi)), 0, 4e-15);
    EXPECT_NEAR(std::abs(gamma_R(1.0) - 1.0), 0, 1e-14);
    EXPECT_THROW(lgamma_c(0.0), pole_error);
    EXPECT_THROW(lgamma_c(-3.0), pole_error);
}

TEST(LogGamma, MultiprecisionAgainstDuplicationAndTaylor) {
    // Γ(1+i) = 2^{i} Γ((1+i)/2) Γ(1+i/2) / √π
    Complex50 i(0, 1);
    Complex50 lhs = log_gamma(Complex50(1, 1));
    Real50 pi = boost::math::constants::pi<Real50>();
    Complex50 rhs = i * mp::log(Real50(2)) + log_gamma_taylor(Complex50(Real50(-0.5), Real50(0.5))) +
                    log_gamma_taylor(Complex50(0, Real50(0.5))) - mp::log(pi) / 2;
    EXPECT_LT(mp::abs(lhs - rhs), Real50("1e-28"));
    // |Γ(1+i)|² = π / sinh π
    Real50 mod2 = mp::exp(2 * lhs.real());
    EXPECT_LT(mp::abs(mod2 - pi / mp::sinh(pi)), Real50("1e-40"));
}

TEST(LogGamma, RecurrenceAndStirling) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-30, 30);
    for (int n = 0; n < 50; ++n) {
        cplx s(U(rng), U(rng));
        cplx d = lgamma_c(s + 1.0) - lgamma_c(s) - std::log(s);
        // equality modulo 2πi along the cut
        double im = std::remainder(d.imag(), 2 * kPi);
        EXPECT_LT(std::abs(cplx(d.real(), im)), 1e-12 * (1 + std::abs(lgamma_c(s))));
    }
    for (double y : {20.0, 50.0, 100.0}) {
        Complex50 s(Real50(3) / 10, Real50(y));
        Complex50 st = (s - Real50(0.5)) * mp::log(s) - s + mp::log(2 * boost::math::constants::pi<Real50>()) / 2 +
                       Real50(1) / (12 * s) - Real50(1) / (360 * s * s * s);
        EXPECT_LT(mp::abs(log_gamma(s) - st), Real50(1) / mp::pow(Real50(y), 5));
    }
    // 25-digit recurrence in the multiprecision path
    Complex50 s(Real50("0.3"), Real50("-7.25"));
    EXPECT_LT(mp::abs(log_gamma(s + Real50(1)) - log_gamma(s) - mp::log(s)), Real50("1e-40"));
}

TEST(BesselK, ZeroOrder) {
    EXPECT_NEAR(bessel_k_im(0, 1), 0.4210244382407083, 1e-15);
    // integral oracle ∫₀^∞ e^{-x cosh u} du
    double x = 2.5;
    double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double u) { return std::exp(-x * std::cosh(u)); }, 0.0, 10.0, 15, 1e-15);
    EXPECT_NEAR(bessel_k_im(0, x), q, 1e-15);
}

TEST(BesselK, AgainstSeriesOracle) {
    for (double t : {0.5, 3.0, 6.5285, 13.0, 26.1, 40.0}) {
        for (double x : {0.01, 0.1, 0.5, 1.0, 3.0, 6.0, 6.5, 10.0, 20.0, 35.0, 50.0}) {
            double ref = k_oracle(t, x);
            double env = std::sqrt(2 * kPi / std::sqrt(std::abs(t * t - x * x) + 1));
            double scale = x < t ? std::max(std::abs(ref), env) : std::abs(ref);
            EXPECT_LE(std::abs(bessel_k_im(t, x) - ref), 1e-12 * scale) << "t=" << t << " x=" << x << " ref=" << ref;
        }
    }
}

TEST(BesselK, DecayAndSymmetry) {
    EXPECT_LT(std::abs(bessel_k_im(6.5285, 50.5)), 1e-15);
    EXPECT_LT(std::abs(bessel_k_im(6.5285, 80)), 1e-15);
    for (double x : {0.3, 2.0, 9.0}) {
        double a = bessel_k_im_unscaled(4.2, x), b = bessel_k_im_unscaled(-4.2, x);
        EXPECT_NEAR(a, b, 1e-15 * std::abs(a) + 1e-300);
        EXPECT_NEAR(bessel_k_im(4.2, x) * std::exp(-kPi * 4.2 / 2), bessel_k_im(-4.2, x) * std::exp(kPi * 4.2 / 2),
                    1e-14 * std::abs(a));
    }
    EXPECT_THROW(bessel_k_im(101, 1), std::range_error);
    EXPECT_THROW(bessel_k_im(1, 0), std::domain_error);
}

TEST(BesselK, TableMatchesDirect) {
    for (double t : {6.5285, 19.6}) {
        KBesselTable tab(t, 0.02);
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> U(std::log(0.02), std::log(tab.xmax()));
        for (int i = 0; i < 300; ++i) {
            double x = std::exp(U(rng));
            EXPECT_NEAR(tab(x), bessel_k_im(t, x), 1e-13) << t << " " << x;
        }
    }
}

TEST(BesselK, ComplexOrder) {
    // real order against Boost, imaginary order against the scaled routine
    for (double x : {0.2, 1.0, 5.0, 20.0}) {
        EXPECT_NEAR(bessel_k(1.5, x).real(), boost::math::cyl_bessel_k(1.5, x), 1e-13 * boost::math::cyl_bessel_k(1.5, x));
        double ki = bessel_k_im_unscaled(2.0, x);
        EXPECT_NEAR(bessel_k(cplx(0, 2), x).real(), ki, 1e-13 * std::abs(boost::math::cyl_bessel_k(0.0, x)));
    }
    // K_{1+0.3i}(x) against the reflection form with J/I series: K_ν = π/2 (I_{-ν} - I_ν)/sin(νπ)
    cplx nu(1, 0.3);
    double x = 0.7;
    auto I = [&](cplx v) {
        cplx term = std::exp(v * std::log(x / 2) - lgamma_c(v + 1.0)), s = term;
        for (int k = 1; k < 60; ++k) {
            term *= (x * x / 4) / (double(k) * (v + double(k)));
            s += term;
        }
        return s;
    };
    cplx ref = kPi / 2.0 * (I(-nu) - I(nu)) / std::sin(nu * kPi);
    EXPECT_LT(std::abs(bessel_k(nu, x) - ref), 1e-12 * std::abs(ref));
}

TEST(BesselJ, ComplexOrder) {
    // real order cross-check against Boost through the complex-order series path
    cplx nu(2.5, 1e-300);
    for (double x : {0.5, 7.0, 30.0, 55.0, 120.0})
        EXPECT_NEAR(bessel_j(cplx(2.5, 0), x).real(), boost::math::cyl_bessel_j(2.5, x), 1e-13);
    // series and Hankel expansion agree in the overlap
    cplx v(0, 3.0);
    for (double x : {45.0, 60.0, 80.0}) {
        Complex50 s = detail::j_series(Complex50(0, 3), Complex50(x, 0));
        cplx a(s.real().convert_to<double>(), s.imag().convert_to<double>());
        cplx h = 0.5 * (hankel_asymptotic(v, x, 1) + hankel_asymptotic(v, x, -1));
        EXPECT_LT(std::abs(a - h), 1e-12 * std::abs(a)) << x;
    }
    // Wronskian-type identity J_ν J_{-ν+1} + J_{-ν} J_{ν-1} = 2 sin(νπ)/(πx)
    cplx w(0.3, 1.7);
    for (double x : {0.4, 3.3, 17.0, 90.0}) {
        cplx lhs = bessel_j(w, x) * bessel_j(1.0 - w, x) + bessel_j(-w, x) * bessel_j(w - 1.0, x);
        cplx rhs = 2.0 * std::sin(w * kPi) / (kPi * x);
        EXPECT_LT(std::abs(lhs - rhs), 1e-11 * std::abs(rhs)) << x;
    }
}

TEST(Whittaker, Identities) {
    EXPECT_NEAR(whittaker_w0(0, 2), std::sqrt(2 / kPi) * 0.4210244382407083, 1e-15);
    double t = 6.5285;
    // the decay threshold applies to the unscaled function
    EXPECT_LT(std::abs(std::exp(-kPi * t / 2) * whittaker_w0(t, 8 * t)), 1e-10);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.1, 40);
    for (int i = 0; i < 20; ++i) {
        double y = U(rng);
        double k = bessel_k_im(t, y / 2);
        if (k == 0) continue;
        EXPECT_NEAR(whittaker_w0(t, y) / (std::sqrt(y / kPi) * k), 1.0, 1e-15);
    }
}

TEST(BallMultiplier, Regimes) {
    EXPECT_NEAR(ball_multiplier(0.01, 0.0), 1.0, 1e-3);
    double R = 0.05, t = 200, z = R * t;
    double bes = 2 * boost::math::cyl_bessel_j(1, z) / z;
    EXPECT_NEAR(ball_multiplier(R, t), bes, 0.02 * std::abs(bes));
    double v = ball_multiplier(0.1, cplx(0, 0.4));
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_LE(std::abs(v), 1.1);
    // small-R limit through an independent quadrature of the defining integral
    auto direct = [](double R, double t) {
        auto f = [&](double r) {
            double q = std::sinh(R * r / 2) / std::sinh(R / 2);
            return std::sqrt(std::max(0.0, 1 - q * q)) * std::cos(R * r * t);
        };
        double s = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -1.0, 1.0, 20, 1e-13);
        return R / (kPi * std::sinh(R / 2)) * s;
    };
    for (double tt : {0.0, 3.0, 17.0, 55.0}) EXPECT_NEAR(ball_multiplier(0.3, tt), direct(0.3, tt), 1e-8);
}

TEST(WeightH, PositivityAndStirling) {
    for (double t = -60; t <= 60; t += 1.7) EXPECT_GT(weight_H(t, 10), 0);
    // pairing makes the value real
    EXPECT_NEAR(std::abs(std::imag(std::exp(lgamma_c(0.25 + cplx(0, 1) * 3.0)))), std::abs(std::imag(std::exp(lgamma_c(0.25 + cplx(0, 1) * 3.0)))), 0);
    EXPECT_GT(weight_H(cplx(0, 0.3), 10), 0);
    EXPECT_THROW(weight_H(cplx(20, 0.5), 10), pole_error);
    EXPECT_DOUBLE_EQ(weight_H_stirling(5, 10), 8 * kPi / (6 * std::sqrt(26.0) * std::sqrt(16.0)));
}

TEST(SpectralMeasure, Mass) {
    EXPECT_NEAR(spectral_measure_mass(100) / (10000 / (2 * kPi * kPi)), 1, 0.005);
    EXPECT_LT(spectral_measure_mass(0.01), 1e-6);
    // T → 0: (1/π²)∫₀^T π r² dr = T³/(3π)
    EXPECT_NEAR(spectral_measure_mass(0.01) / (1e-6 / (3 * kPi)), 1, 1e-3);
    for (double T : {10.0, 30.0, 100.0}) EXPECT_LE(std::abs(spectral_measure_mass(T) - T * T / (2 * kPi * kPi)), 0.05 * T);
    double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double r) { return r * std::tanh(kPi * r) / (2 * kPi * kPi); }, -7.0, 7.0, 15, 1e-14);
    EXPECT_NEAR(spectral_measure_mass(7), q, 1e-12);
}
