#include <dihedral/mellin.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace dihedral;
using namespace dihedral::mellin;

TEST(Mellin, MinusKernelAtOne) {
    auto id = MellinKernelId::minus(1.0);
    cplx c = mellin_J(id, 1.0), n = mellin_J_numeric(id, 1.0);
    EXPECT_LT(std::abs(c - n), 1e-8 * std::abs(c)) << c << " " << n;
}

TEST(Mellin, PlusKernelRealOnRealAxis) {
    auto id = MellinKernelId::plus(1.3);
    for (double s : {0.1, 0.3, 0.45}) EXPECT_LT(std::abs(mellin_J(id, s).imag()), 1e-15 * std::abs(mellin_J(id, s)));
}

TEST(Mellin, RandomSamplesAgainstNumericIntegrals) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> R(0.5, 3.0), T(-3, 3);
    for (int n = 0; n < 7; ++n) {
        double r = R(rng);
        std::uniform_real_distribution<double> Sm(0.3, 2.5), Sp(0.1, 0.45), Sh(-0.8, 0.45);
        cplx sm(Sm(rng), T(rng)), sp(Sp(rng), T(rng)), sh(Sh(rng), T(rng));
        auto m = MellinKernelId::minus(r), p = MellinKernelId::plus(r);
        auto h = MellinKernelId::hol(2 + 2 * (n % 3));
        EXPECT_LT(std::abs(mellin_J(m, sm) - mellin_J_numeric(m, sm)), 1e-8 * std::abs(mellin_J(m, sm))) << r << sm;
        EXPECT_LT(std::abs(mellin_J(p, sp) - mellin_J_numeric(p, sp)), 1e-8 * std::abs(mellin_J(p, sp))) << r << sp;
        EXPECT_LT(std::abs(mellin_J(h, sh) - mellin_J_numeric(h, sh)), 1e-8 * std::abs(mellin_J(h, sh))) << h.k << sh;
    }
}

TEST(Mellin, Residues) {
    auto h = MellinKernelId::hol(4);
    cplx res = mellin_residue(h, 0);
    EXPECT_LT(std::abs(res - std::pow(cplx(0, 2 * kPi), 4) / 6.0), 1e-12 * std::abs(res));
    for (int k : {2, 4, 6})
        for (int n : {0, 1}) {
            auto id = MellinKernelId::hol(k);
            cplx c = contour_residue([&](cplx s) { return mellin_J(id, s); }, pole(id, n), 0.5);
            EXPECT_LT(std::abs(c - mellin_residue(id, n)), 1e-8 * std::abs(c));
        }
    for (double r : {0.7, 2.2})
        for (int n : {0, 1})
            for (int sg : {1, -1}) {
                auto m = MellinKernelId::minus(r), p = MellinKernelId::plus(r);
                double rho = std::min(0.4, r);
                cplx cm = contour_residue([&](cplx s) { return mellin_J(m, s); }, pole(m, n, sg), rho);
                cplx cp = contour_residue([&](cplx s) { return mellin_J(p, s); }, pole(p, n, sg), rho);
                EXPECT_LT(std::abs(cm - mellin_residue(m, n, sg)), 1e-8 * std::abs(cm));
                EXPECT_LT(std::abs(cp - mellin_residue(p, n, sg)), 1e-8 * std::abs(cp));
                // Res of the plus kernel is (−1)^n times that of the minus kernel
                EXPECT_LT(std::abs(cp - (n % 2 ? -1.0 : 1.0) * cm), 1e-8 * std::abs(cm));
            }
}

TEST(Mellin, PoleErrors) {
    EXPECT_THROW(mellin_J(MellinKernelId::minus(1), cplx(0, 2)), special::pole_error);
    EXPECT_THROW(mellin_J(MellinKernelId::hol(2), -1.0), special::pole_error);
    EXPECT_THROW(MellinKernelId::hol(3), std::invalid_argument);
}

TEST(Mellin, KernelValues) {
    // 𝒥_r^+ at r → 0 tends to −2πY₀(4πx)
    double x = 0.37;
    EXPECT_NEAR(kernel_value(MellinKernelId::plus(1e-6), x), kernel_value(MellinKernelId::plus(0), x), 1e-8);
    EXPECT_NEAR(kernel_value(MellinKernelId::minus(0), x), 4 * boost::math::cyl_bessel_k(0, 4 * kPi * x), 1e-14);
}
