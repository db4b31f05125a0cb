#include <dihedral/spectral.hpp>

#include <gtest/gtest.h>

#include <chrono>

using namespace dihedral;
using namespace dihedral::spectral;

namespace {

const DihedralForm& g5() {
    static const DihedralForm g = make_dihedral(5, 1, 0, 20000);
    return g;
}

const Context& ctx() {
    static const Context c = make_context(g5());
    return c;
}

const EisensteinLine& line() {
    static const EisensteinLine l(ctx(), 2 * ctx().t_g + 15, 0.5);
    return l;
}

SpectralDatum synthetic(long long level, double t, int parity, double scale) {
    SpectralDatum d;
    d.level = level;
    d.eigen = t;
    d.parity = parity;
    d.lvalues = {{keys::L_f, 0.8 * scale}, {keys::L_f_chi, 1.3 * scale}, {keys::L_f_g2, 0.6 * scale}, {keys::L_sym2, 1.1}};
    if (level == 1) d.local_lambda[5] = -0.72;
    return d;
}

std::vector<SpectralDatum> synthetic_set() {
    return {synthetic(1, 9.5336952613535575, 1, 1.0), synthetic(1, 12.1730083246, -1, 1.0),
            synthetic(5, 4.8937, 1, 0.5), synthetic(5, 6.6, 1, 2.0), synthetic(1, 13.7797513519, 1, 0.3)};
}

} // namespace

TEST(Spectral, TrivialCases) {
    auto r = variance_expansion(ctx(), 0.7, {}, nullptr);
    EXPECT_EQ(r.cusp_partial, 0.0);
    EXPECT_EQ(r.eisenstein_partial, 0.0);
    auto f = fourth_moment_spectral(ctx(), {}, nullptr);
    EXPECT_EQ(f.total(), 1 / ctx().vol);
    EXPECT_NEAR(ctx().vol, 2 * kPi, 1e-15);
    EXPECT_NEAR(f.target, 0.477464829275686, 1e-12);
    EXPECT_NEAR(f.bulk_reference, 2 / (2 * kPi), 1e-15);
    EXPECT_EQ(mixed_moment(ctx(), [](double) { return 0.0; }, synthetic_set(), &line()), 0.0);
    EXPECT_EQ(splitting_factor(ctx(), synthetic(5, 3, 1, 1)), 1.0);
}

TEST(Spectral, MissingKeysAndOddForms) {
    auto d = synthetic(1, 9.5, 1, 1);
    d.lvalues.erase(keys::L_f_g2);
    EXPECT_THROW(variance_expansion(ctx(), 0.5, {d}, nullptr), std::invalid_argument);
    auto e = synthetic(1, 9.5, 1, 1);
    e.local_lambda.clear();
    EXPECT_THROW(fourth_moment_spectral(ctx(), {e}, nullptr), std::invalid_argument);
    auto odd = synthetic(1, 9.5, -1, 1);
    EXPECT_EQ(triple_product_cusp(ctx(), odd), 0.0);
    EXPECT_EQ(fourth_moment_spectral(ctx(), {odd}, nullptr).cusp_partial, 0.0);
}

TEST(Spectral, TwoAssemblyPathsAgree) {
    const auto data = synthetic_set();
    for (double R : {0.05, 0.4, 1.5}) {
        auto rep = variance_expansion(ctx(), R, data, &line());
        auto m2 = [R](double t) { double h = special::ball_multiplier(R, t); return h * h; };
        double mm = mixed_moment(ctx(), regrouped_weight(ctx(), m2), data, &line());
        EXPECT_LT(std::abs(mm - (rep.cusp_partial + rep.eisenstein_partial)), 1e-10 * std::abs(mm)) << R;
    }
    auto fm = fourth_moment_spectral(ctx(), data, &line());
    double mm = mixed_moment(ctx(), regrouped_weight(ctx(), [](double) { return 1.0; }), data, &line());
    EXPECT_LT(std::abs(mm - fm.cusp_partial - fm.eisenstein_partial), 1e-10 * mm);

    // a single Eisenstein node, supplied as data
    SpectralDatum e;
    e.kind = DatumKind::eisenstein_sample;
    e.eigen = line().nodes()[7];
    e.weight = 0.3;
    e.lvalues[keys::eis_abs2] = line().finite_values()[7];
    auto re = fourth_moment_spectral(ctx(), {e}, nullptr);
    double me = mixed_moment(ctx(), regrouped_weight(ctx(), [](double) { return 1.0; }), {e}, nullptr);
    EXPECT_LT(std::abs(me - re.eisenstein_partial), 1e-12 * me);
}

TEST(Spectral, EisensteinLineMatchesClosedForm) {
    const auto& L = line();
    for (std::size_t i : {std::size_t(0), std::size_t(13), L.size() / 2, L.size() - 1}) {
        double t = L.nodes()[i];
        cplx w = lfunc::watson_ichino_eisenstein(cplx(0.5, t), ctx().g2);
        EXPECT_LT(std::abs(L.triple_values()[i] - std::norm(w)), 1e-9 * std::norm(w)) << t;
        EXPECT_GE(special::weight_H(t, ctx().t_g), 0.0);
    }
    // single sample sanity at t = 1
    SpectralDatum e;
    e.kind = DatumKind::eisenstein_sample;
    e.eigen = 1.0;
    e.lvalues[keys::eis_abs2] = 0.37;
    double v = mixed_moment(ctx(), [](double) { return 1.0; }, {e}, nullptr);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0);
}

TEST(Spectral, MonotoneInData) {
    auto data = synthetic_set();
    std::vector<SpectralDatum> acc;
    double prev = 0;
    for (const auto& d : data) {
        acc.push_back(d);
        double cur = variance_expansion(ctx(), 0.6, acc, nullptr).cusp_partial;
        EXPECT_GE(cur, prev);
        prev = cur;
    }
    auto j = variance_expansion(ctx(), 0.6, acc, &line()).to_json();
    EXPECT_EQ(j["terms"].size(), data.size());
    auto back = SpectralDatum::from_json(data[2].to_json());
    EXPECT_EQ(back.level, 5);
    EXPECT_EQ(back.lvalues.at(keys::L_f_g2), data[2].lvalues.at(keys::L_f_g2));
}

TEST(Spectral, SmallRadiusApproachesFourthMoment) {
    const auto data = synthetic_set();
    auto v = variance_expansion(ctx(), 1e-4, data, &line());
    auto f = fourth_moment_spectral(ctx(), data, &line());
    double tol = 1e-6 * f.total() + v.truncation.eis_quadrature_error + f.truncation.eis_quadrature_error;
    EXPECT_LT(std::abs(v.total() - (f.total() - f.constant_term)), tol);
    EXPECT_LT(f.truncation.eis_tail_estimate, 1e-8);
}

TEST(Spectral, EisensteinOnlyBoundsFromQuadrature) {
    const double tol = 1e-6;
    auto direct = fourth_moment_direct(g5(), tol);
    EXPECT_GE(direct.value, 1 / ctx().vol - tol);
    auto f = fourth_moment_spectral(ctx(), {}, &line());
    EXPECT_GT(f.eisenstein_partial, 0);
    EXPECT_LE(f.total(), direct.value + 2 * tol);

    const double R = 0.5;
    auto vd = variance_direct(g5(), R, 1e-6, {}, 16);
    auto ve = variance_expansion(ctx(), R, {}, &line());
    EXPECT_GT(ve.eisenstein_partial, 0);
    EXPECT_LE(ve.eisenstein_partial, vd.value + 1e-6);
}
