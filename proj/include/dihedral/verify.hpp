#pragma once

#include <dihedral/locconst.hpp>
#include <dihedral/spectral.hpp>
#include <dihedral/sums.hpp>

#include <boost/math/special_functions/bessel.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace dihedral::verify {

/// @brief One named assertion: a measured deviation against its tolerance.
struct Check {
    std::string name;
    double value = 0;
    double tolerance = 0;
    bool pass = false;
    std::string note;

    nlohmann::json to_json() const {
        nlohmann::json j{{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}};
        if (!note.empty()) j["note"] = note;
        return j;
    }
};

/// @brief Outcome of a suite: its checks, any informational rows, and the wall time.
struct Report {
    std::string suite;
    std::vector<Check> checks;
    nlohmann::json info = nlohmann::json::object();
    double seconds = 0;

    /// Records value ≤ tol (NaN fails).
    void expect_le(std::string name, double value, double tol, std::string note = "") {
        checks.push_back({std::move(name), value, tol, value <= tol, std::move(note)});
    }
    void expect_true(std::string name, bool ok, std::string note = "") {
        checks.push_back({std::move(name), ok ? 0.0 : 1.0, 0.0, ok, std::move(note)});
    }

    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
    const Check* first_failure() const {
        for (const auto& c : checks)
            if (!c.pass) return &c;
        return nullptr;
    }
    double worst_ratio() const {
        double w = 0;
        for (const auto& c : checks)
            if (c.tolerance > 0) w = std::max(w, c.value / c.tolerance);
        return w;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["suite"] = suite;
        j["passed"] = passed();
        j["seconds"] = seconds;
        auto arr = nlohmann::json::array();
        for (const auto& c : checks) arr.push_back(c.to_json());
        j["checks"] = arr;
        if (const Check* f = first_failure()) j["first_failure"] = f->name;
        if (!info.empty()) j["info"] = info;
        return j;
    }
};

namespace detail {

class Timer {
public:
    explicit Timer(Report& r) : r_(r), t0_(std::chrono::steady_clock::now()) {}
    ~Timer() { r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    Report& r_;
    std::chrono::steady_clock::time_point t0_;
};

inline std::string label(const std::string& base, std::initializer_list<std::pair<const char*, double>> kv) {
    std::ostringstream os;
    os << base;
    for (auto& [k, v] : kv) os << ' ' << k << '=' << v;
    return os.str();
}

inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

} // namespace detail

// ---------------------------------------------------------------- hecke

struct HeckeOptions {
    std::vector<long long> D{5, 13, 17};
    std::vector<long long> ell{1, 2};
    long long N = 2000;
    double tol = 1e-20;
};

/// @brief Hecke relations, Ramanujan bound at primes, inert/ramified values and self-twist for n, m ≤ N.
inline Report hecke(const HeckeOptions& o = {}) {
    Report r{"hecke"};
    detail::Timer tm(r);
    for (long long D : o.D)
        for (long long ell : o.ell) {
            const auto tag = [&](const char* what) { return detail::label(what, {{"D", double(D)}, {"ell", double(ell)}}); };
            DihedralForm g = make_dihedral(D, ell, 0, o.N * o.N);
            const auto& L = g.table();
            const auto& F = g.field();

            Quad rel_err = 0;
            for (long long m = 1; m <= o.N; ++m)
                for (long long n = 1; n <= o.N; ++n) {
                    long long h = std::gcd(m, n);
                    Quad rhs = L[m * n];
                    if (h > 1) {
                        rhs = 0;
                        for (long long d : arith::divisors(h)) rhs += chi(F, d) * L[m * n / (d * d)];
                    }
                    rel_err = std::max(rel_err, Quad(abs(L[m] * L[n] - rhs)));
                }
            r.expect_le(tag("hecke relation"), static_cast<double>(rel_err), o.tol);

            Quad bound = 0, inert = 0, ram = 0, twist = 0;
            for (long long p = 2; p <= o.N; ++p) {
                if (!arith::is_prime(p)) continue;
                bound = std::max(bound, Quad(abs(L[p]) - 2));
                int c = chi(F, p);
                if (c == -1) inert = std::max(inert, Quad(abs(L[p]) + abs(L[p * p] - 1)));
                if (c == 0) {
                    ram = std::max(ram, Quad(abs(abs(L[p]) - 1)));
                    Quad pk = L[p];
                    for (long long q = p * p; q <= o.N; q *= p, pk *= L[p]) ram = std::max(ram, Quad(abs(L[q] - pk * L[p])));
                }
            }
            for (long long n = 1; n <= o.N; ++n)
                if (chi(F, n) == -1) twist = std::max(twist, Quad(abs(L[n])));
            r.expect_le(tag("|lambda(p)| - 2"), static_cast<double>(bound), 0.0);
            r.expect_le(tag("inert lambda(p)=0, lambda(p^2)=1"), static_cast<double>(inert), o.tol);
            r.expect_le(tag("ramified |lambda(p)|=1, lambda(p^k)=lambda(p)^k"), static_cast<double>(ram), o.tol);
            r.expect_le(tag("self-twist lambda(n)chi(n)=lambda(n)"), static_cast<double>(twist), o.tol);

            // table against the ideal-sum definition
            Real50 def_err = 0;
            for (long long n = 1; n <= 300; ++n) {
                Real50 s = 0;
                for (auto& I : ideals_of_norm(F, n)) s += g.character().psi(I.generator).real();
                def_err = std::max(def_err, Real50(abs(Real50(L[n]) - s)));
            }
            r.expect_le(tag("ideal sums n<=300"), def_err.convert_to<double>(), o.tol);
        }
    return r;
}

// ---------------------------------------------------------------- gauss

struct GaussOptions {
    std::vector<long> D{5, 13};
    long c_max = 200;
    long m_max = 50;
    double tol = 1e-12;
};

inline Report gauss(const GaussOptions& o = {}) {
    Report r{"gauss"};
    detail::Timer tm(r);
    for (long D : o.D) {
        double worst = 0;
        long cnt = 0;
        for (long c = D; c <= o.c_max; c += D)
            for (long m = 0; m <= o.m_max; ++m) {
                auto [lhs, rhs] = sums::gauss_miyake_check(D, c, m);
                worst = std::max(worst, std::abs(lhs - rhs));
                ++cnt;
            }
        r.expect_le(detail::label("twisted Gauss sum identity", {{"D", double(D)}, {"cases", double(cnt)}}), worst, o.tol);
        r.expect_le(detail::label("|tau(chi)| = sqrt|D|", {{"D", double(D)}}),
                    std::abs(std::abs(sums::gauss_sum(D)) - std::sqrt(double(std::abs(D)))), o.tol);
    }
    return r;
}

// ---------------------------------------------------------------- voronoi

struct VoronoiCase {
    std::string name;
    bool dihedral;
    long D, d, c;
    sums::GaussianParams phi;
};

inline std::vector<VoronoiCase> voronoi_matrix() {
    return {
        {"divisor c=2", false, 1, 1, 2, {100, 10}},  {"divisor c=5", false, 1, 2, 5, {100, 10}},
        {"divisor c=10", false, 1, 3, 10, {60, 6}},  {"chi5 c=5", false, 5, 1, 5, {100, 10}},
        {"chi5 c=10", false, 5, 3, 10, {60, 6}},     {"chi5 c=2", false, 5, 1, 2, {100, 10}},
        {"g5 c=5", true, 5, 1, 5, {100, 10}},        {"g5 c=10", true, 5, 7, 10, {60, 6}},
        {"g5 c=2", true, 5, 1, 2, {100, 10}},        {"g5 c=5 d=3", true, 5, 3, 5, {60, 6}},
    };
}

inline Report voronoi(double tol = 1e-5, const std::vector<VoronoiCase>& cases = voronoi_matrix()) {
    Report r{"voronoi"};
    detail::Timer tm(r);
    std::unique_ptr<DihedralForm> g;
    auto rows = nlohmann::json::array();
    for (const auto& k : cases) {
        if (k.dihedral && (!g || g->level() != k.D)) g = std::make_unique<DihedralForm>(make_dihedral(k.D, 1, 0, 40000));
        auto L = k.dihedral ? sums::VoronoiSeries::dihedral(*g) : sums::VoronoiSeries::eisenstein(k.D);
        auto [lhs, rhs] = sums::voronoi_both_sides(L, k.d, k.c, k.phi);
        double diff = std::abs(lhs.value - rhs.value), budget = lhs.truncation_error + rhs.truncation_error;
        r.expect_le(k.name + ": |lhs - rhs| within reported error", diff, budget);
        r.expect_le(k.name + ": reported error", budget, tol);
        rows.push_back({{"case", k.name}, {"lhs", lhs.to_json()}, {"rhs", rhs.to_json()}, {"diff", diff}});
    }
    r.info["cases"] = rows;
    return r;
}

// ---------------------------------------------------------------- local

inline locconst::CharacterData local_data(locconst::CaseId id) {
    locconst::CharacterData d;
    if (id == locconst::CaseId::unramified_PS || id == locconst::CaseId::translated_PS)
        d.omega3_pi = locconst::Gaussian(locconst::Rational(5, 4));
    return d;
}

/// @brief Exact local constants by both routes; the all-ramified row is informational.
inline Report local(const std::vector<long>& qs = {2, 3, 5, 7}) {
    using namespace locconst;
    Report r{"local"};
    detail::Timer tm(r);
    auto rows = nlohmann::json::array();
    for (long q : qs)
        for (CaseId id : {CaseId::special_2St, CaseId::unramified_PS, CaseId::translated_PS, CaseId::all_ramified_PS}) {
            TableRow row = table_row(id, q, local_data(id));
            std::string value = row.matrix_coefficients.to_string();
            std::ostringstream exp;
            exp << row.expected;
            const bool agree = row.matrix_coefficients == row.rankin_selberg;
            rows.push_back({{"case", to_string(id)},
                            {"q", q},
                            {"value", value},
                            {"expected", exp.str()},
                            {"routes_agree", agree},
                            {"match", row.matches()},
                            {"asserted", id != CaseId::all_ramified_PS}});
            std::string tag = to_string(id) + " q=" + std::to_string(q);
            if (id == CaseId::all_ramified_PS) continue;
            r.expect_true(tag + ": two routes agree", agree, value + " vs " + row.rankin_selberg.to_string());
            r.expect_true(tag + ": equals " + exp.str(), row.matches(), value);
        }
    r.info["table"] = rows;
    return r;
}

// ---------------------------------------------------------------- mellin

struct MellinOptions {
    unsigned seed = 2024;
    int samples = 20;
    double tol = 1e-8;
};

inline Report mellin_suite(const MellinOptions& o = {}) {
    using namespace mellin;
    Report r{"mellin"};
    detail::Timer tm(r);
    std::mt19937 rng(o.seed);
    std::uniform_real_distribution<double> R(0.5, 3.0), T(-3, 3), Sm(0.3, 2.5), Sp(0.1, 0.45), Sh(-0.8, 0.45);
    for (int n = 0; n < o.samples; ++n) {
        MellinKernelId id;
        cplx s;
        switch (n % 3) {
        case 0: id = MellinKernelId::minus(R(rng)); s = {Sm(rng), T(rng)}; break;
        case 1: id = MellinKernelId::plus(R(rng)); s = {Sp(rng), T(rng)}; break;
        default: id = MellinKernelId::hol(2 + 2 * (n % 4)); s = {Sh(rng), T(rng)}; break;
        }
        cplx c = mellin_J(id, s), num = mellin_J_numeric(id, s);
        std::ostringstream tag;
        tag << "sample " << n << ' ' << to_string(id.kind) << " r=" << id.r << " k=" << id.k << " s=" << s;
        r.expect_le(tag.str(), detail::rel(num, c), o.tol);
    }
    for (int k : {2, 4, 6})
        for (int n : {0, 1}) {
            auto id = MellinKernelId::hol(k);
            cplx c = contour_residue([&](cplx s) { return mellin_J(id, s); }, pole(id, n), 0.5);
            r.expect_le(detail::label("residue hol", {{"k", double(k)}, {"n", double(n)}}),
                        detail::rel(mellin_residue(id, n), c), o.tol);
        }
    for (double rr : {0.7, 2.2})
        for (int n : {0, 1})
            for (int sg : {1, -1})
                for (auto id : {MellinKernelId::minus(rr), MellinKernelId::plus(rr)}) {
                    cplx c = contour_residue([&](cplx s) { return mellin_J(id, s); }, pole(id, n, sg), std::min(0.4, rr));
                    r.expect_le(detail::label("residue " + to_string(id.kind),
                                              {{"r", rr}, {"n", double(n)}, {"sign", double(sg)}}),
                                detail::rel(mellin_residue(id, n, sg), c), o.tol);
                }
    return r;
}

// ---------------------------------------------------------------- automorphic identities

/// @brief ⟨|g|², E_∞(·, s)⟩ by quadrature against the L-function closed form (unit-norm g).
inline Report wi_eisenstein(long long D = 5, long long ell = 1, cplx s = {1.5, 0.3}, double tol = 1e-3) {
    using namespace automorphic;
    Report r{"wi-eisenstein"};
    detail::Timer tm(r);
    DihedralForm g = make_dihedral(D, ell, 0, 20000);
    DihedralForm g2 = make_dihedral(D, 2 * ell, 0, 20000);
    QuadratureOptions o;
    o.Y = cusp_height(D, g.t());
    const double floor = domain_y_floor(D, o.Y);
    auto f = form_evaluator(g, floor);
    const double nrm = norm_closed_form(g);
    EisensteinEvaluator E(D, s, floor);
    cplx closed = lfunc::watson_ichino_eisenstein(s, g2);
    o.tol = 1e-6 * std::abs(closed) * nrm;
    auto q = petersson_inner([&](const UpperHalfPoint& z) { return cplx(std::norm(f(z))); },
                             [&](const UpperHalfPoint& z) { return E(z); }, D, o);
    cplx direct = q.value / nrm;
    std::ostringstream tag;
    tag << "D=" << D << " ell=" << ell << " s=" << s << ": quadrature vs closed form";
    r.expect_le(tag.str(), detail::rel(direct, closed), tol);
    r.info = {{"quadrature", {direct.real(), direct.imag()}},
              {"closed_form", {closed.real(), closed.imag()}},
              {"quadrature_error", q.error / nrm}};
    return r;
}

/// @brief ⟨g, g⟩ for ρ(1) = 1 against 2Λ(1, ad g).
inline Report norm(long long D = 5, const std::vector<long long>& ells = {1, 2}, double tol = 1e-3) {
    using namespace automorphic;
    Report r{"norm"};
    detail::Timer tm(r);
    for (long long ell : ells) {
        DihedralForm g = make_dihedral(D, ell, 0, 20000);
        QuadratureOptions o;
        o.Y = cusp_height(D, g.t());
        auto f = form_evaluator(g, domain_y_floor(D, o.Y));
        const double closed = norm_closed_form(g);
        o.tol = 1e-6 * closed;
        auto ev = [&](const UpperHalfPoint& z) { return f(z); };
        auto q = petersson_inner(ev, ev, D, o);
        r.expect_le(detail::label("<g,g> vs 2 Lambda(1, ad g)", {{"D", double(D)}, {"ell", double(ell)}}),
                    detail::rel(q.value, closed), tol);
        r.info["ell=" + std::to_string(ell)] = {{"quadrature", q.value.real()}, {"closed_form", closed}};
    }
    return r;
}

inline std::vector<automorphic::UpperHalfPoint> atkin_lehner_points(int n = 20, unsigned seed = 17) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(0.3, 1.5);
    std::vector<automorphic::UpperHalfPoint> pts;
    for (int i = 0; i < n; ++i) pts.emplace_back(ux(rng), uy(rng));
    return pts;
}

inline Report atkin_lehner(long long D = 5, long long w = 5, double tol = 1e-8) {
    Report r{"atkin-lehner"};
    detail::Timer tm(r);
    DihedralForm g = make_dihedral(D, 1, 0, 20000);
    auto pts = atkin_lehner_points();
    double dev = automorphic::atkin_lehner_check(g, w, pts);
    r.expect_le(detail::label("max |g|W - eta g| over 20 points", {{"D", double(D)}, {"w", double(w)}}), dev, tol);
    r.info = {{"max_deviation", dev}, {"form_scale", std::exp(-kPi * g.t() / 2)}};
    return r;
}

// ---------------------------------------------------------------- fourth moment

struct MomentRow {
    long long ell;
    double t_g, direct, direct_error, eisenstein_only, target;
};

struct MomentOptions {
    long long D = 5;
    std::vector<long long> ells{1, 2, 3, 4, 5, 6};
    double tol = 1e-6;
    double floor_slack = 1e-4;
};

/// @brief ∫|g|⁴ by quadrature against the floor 1/vol and the Eisenstein-only spectral partial sum.
inline Report fourth_moment(const MomentOptions& o, std::vector<MomentRow>* rows = nullptr) {
    Report r{"fourth-moment"};
    detail::Timer tm(r);
    for (long long ell : o.ells) {
        DihedralForm g = make_dihedral(o.D, ell, 0, 20000);
        auto ctx = spectral::make_context(g);
        auto direct = spectral::fourth_moment_direct(g, o.tol);
        spectral::EisensteinLine line(ctx, 2 * ctx.t_g + 15, 0.5);
        auto eis = spectral::fourth_moment_spectral(ctx, {}, &line);
        const auto tag = [&](const char* w) { return detail::label(w, {{"D", double(o.D)}, {"ell", double(ell)}}); };
        r.expect_le(tag("1/vol - direct"), 1 / ctx.vol - direct.value, o.floor_slack);
        r.expect_le(tag("eisenstein-only - direct"), eis.total() - direct.value, 2 * o.tol);
        if (rows) rows->push_back({ell, ctx.t_g, direct.value, direct.error, eis.total(), eis.target});
    }
    return r;
}

// ---------------------------------------------------------------- asymptotics

/// @brief Ball multiplier against its three small-R regimes, and H(t) against its Stirling form.
inline Report asymptotics(double C = 2.0) {
    Report r{"asymptotics"};
    detail::Timer tm(r);
    const double R = 0.01;
    auto asym = [](double z) { return std::pow(2 / z, 1.5) / std::sqrt(kPi) * std::sin(z - kPi / 4); };
    for (double t : {1.0, 3.0}) {
        double h = special::ball_multiplier(R, t);
        r.expect_le(detail::label("h_R ~ 1", {{"R", R}, {"t", t}}), std::abs(h - 1), 0.02);
    }
    for (double t : {100.0, 300.0, 450.0}) {
        double z = R * t, h = special::ball_multiplier(R, t);
        double ref = 2 * boost::math::cyl_bessel_j(1, z) / z;
        r.expect_le(detail::label("h_R ~ 2J1(Rt)/Rt", {{"R", R}, {"t", t}}), std::abs(h / ref - 1), 0.02);
    }
    for (double t : {5000.0, 12100.0}) {
        double h = special::ball_multiplier(R, t);
        r.expect_le(detail::label("h_R ~ oscillatory", {{"R", R}, {"t", t}}), std::abs(h / asym(R * t) - 1), 0.02);
    }
    const std::pair<double, double> pts[] = {{10, 10}, {10, 15}, {10, 25}, {10, 40}, {10, 100},
                                             {20, 10}, {20, 30}, {20, 45}, {20, 60}, {20, 120}};
    for (auto [tg, t] : pts) {
        double E = 1 / (1 + t) + 1 / (1 + std::abs(2 * tg + t)) + 1 / (1 + std::abs(2 * tg - t));
        double ratio = special::weight_H(t, tg) / special::weight_H_stirling(t, tg);
        r.expect_le(detail::label("H/Stirling - 1 vs C*E", {{"t_g", tg}, {"t", t}}), std::abs(ratio - 1), C * E);
    }
    return r;
}

/// @brief Suites reachable by name.
inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n{"hecke", "gauss", "voronoi", "local", "mellin", "wi-eisenstein", "atkin-lehner"};
    return n;
}

inline Report run(const std::string& name) {
    if (name == "hecke") return hecke();
    if (name == "gauss") return gauss();
    if (name == "voronoi") return voronoi();
    if (name == "local") return local();
    if (name == "mellin") return mellin_suite();
    if (name == "wi-eisenstein") return wi_eisenstein();
    if (name == "atkin-lehner") return atkin_lehner();
    throw std::invalid_argument("unknown suite: " + name);
}

} // namespace dihedral::verify
