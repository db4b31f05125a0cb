#include <dihedral/cli.hpp>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace dihedral;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

fs::path workdir() {
    static const fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "dihedral_cli_test";
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Run run_cli(const std::string& args) {
    const char* bin = std::getenv("DIHEDRAL_CLI");
    if (!bin) throw std::runtime_error("DIHEDRAL_CLI is not set");
    fs::path err = workdir() / "stderr.txt";
    std::string cmd = "cd '" + workdir().string() + "' && '" + bin + "' " + args + " 2>'" + err.string() + "'";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out, slurp(err)};
}

double coeff(const json& table, long long n) { return std::stod(table["coeffs"][n - 1][1].get<std::string>()); }

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

// Hecke eigenvalues of E(z, 1/2 + it): Σ_{d|n} (d²/n)^{it}
json eisenstein_record(double t, long long N, double distort = 1.0) {
    auto arr = json::array();
    for (long long n = 1; n <= N; ++n) {
        double v = 0;
        for (long long d : arith::divisors(n)) v += std::cos(t * std::log(double(d) * double(d) / double(n)));
        arr.push_back({n, n == 1 ? 1.0 : v * distort});
    }
    return {{"level", 1}, {"t_f", t}, {"parity", 1}, {"coeffs", arr}, {"source", "eisenstein t=" + std::to_string(t)}};
}

} // namespace

TEST(Cli, TabulateWritesTable) {
    auto r = run_cli("tabulate 5 1 100 --out g5.json");
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(slurp(workdir() / "g5.json"));
    EXPECT_EQ(j["version"], "0.1.0");
    EXPECT_TRUE(j.contains("precision") && j.contains("truncation"));
    const json& t = j["table"];
    EXPECT_EQ(t["coeffs"].size(), 100u);
    EXPECT_EQ(coeff(t, 2), 0.0);
    EXPECT_NEAR(coeff(t, 4), 1.0, 1e-30);
    EXPECT_NEAR(coeff(t, 5), 1.0, 1e-30);

    auto s = run_cli("tabulate 13 1 100");
    ASSERT_EQ(s.code, 0);
    EXPECT_GT(std::stod(json::parse(s.out)["table"]["t_g"].get<std::string>()), 0);
}

TEST(Cli, UsageErrors) {
    auto r = run_cli("tabulate 4 1 10");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("congruent to 1 mod 4"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
    EXPECT_EQ(run_cli("verify nonsense").code, 2);
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("moment 5 1 cubic").code, 2);
    EXPECT_EQ(run_cli("moment 5 1 variance").code, 2);
    EXPECT_EQ(run_cli("--precision 10 tabulate 5 1 10").code, 2);
    EXPECT_EQ(run_cli("voronoi eisenstein 5 2 4").code, 2);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    {
        std::ofstream c(workdir() / "run.conf");
        c << "# run settings\n[precision]\nworking_digits = 40\nquad_tol = 1e-12\n[truncation]\nT_pad = \"20\"\n";
    }
    auto a = run_cli("--config run.conf tabulate 5 1 3");
    ASSERT_EQ(a.code, 0) << a.err;
    json ja = json::parse(a.out);
    EXPECT_EQ(ja["precision"]["working_digits"], 40);
    EXPECT_EQ(ja["precision"]["quad_tol"], 1e-12);
    EXPECT_EQ(ja["truncation"]["T_pad"], 20.0);
    auto b = run_cli("--config run.conf --precision 30 tabulate 5 1 3");
    EXPECT_EQ(json::parse(b.out)["precision"]["working_digits"], 30);
    {
        std::ofstream c(workdir() / "bad.conf");
        c << "colour = blue\n";
    }
    auto bad = run_cli("--config bad.conf tabulate 5 1 3");
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("colour"), std::string::npos);
}

TEST(Cli, EvalCsv) {
    auto r = run_cli("eval 5 1 0.1 1.0 -0.3 0.7");
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# dihedral_cli 0.1.0"), std::string::npos);
    auto rows = csv_rows(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "y", "re_g", "im_g"}));
    DihedralForm g = make_dihedral(5, 1, 0, 20000);
    auto ev = automorphic::form_evaluator(g, 0.05);
    cplx v = ev(automorphic::UpperHalfPoint(-0.3, 0.7));
    EXPECT_NEAR(std::stod(rows[2][2]), v.real(), 1e-14);
    EXPECT_NEAR(std::stod(rows[2][3]), v.imag(), 1e-14);
    EXPECT_EQ(run_cli("eval 5 1 0.1").code, 2);
}

TEST(Cli, VerifySuites) {
    auto loc = run_cli("verify local");
    EXPECT_EQ(loc.code, 0) << loc.out;
    EXPECT_NE(loc.out.find("special_2St        2  3/4"), std::string::npos) << loc.out;
    EXPECT_NE(loc.out.find("unramified_PS      2  1/2"), std::string::npos) << loc.out;
    EXPECT_NE(loc.out.find("conjecture check"), std::string::npos);

    auto gs = run_cli("--json verify gauss");
    ASSERT_EQ(gs.code, 0);
    json j = json::parse(gs.out);
    EXPECT_TRUE(j["report"]["passed"].get<bool>());
    for (const auto& c : j["report"]["checks"]) EXPECT_TRUE(c.contains("tolerance"));

    auto hk = run_cli("verify hecke --out hecke.json");
    EXPECT_EQ(hk.code, 0) << hk.err;
    json jh = json::parse(slurp(workdir() / "hecke.json"));
    EXPECT_EQ(jh["report"]["checks"].size(), 36u);
    EXPECT_EQ(jh["command"], "verify hecke");

    EXPECT_EQ(run_cli("verify atkin-lehner").code, 0);
}

TEST(Cli, LocalAndVoronoi) {
    auto r = run_cli("local --q 2,9");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("special_2St        9  10/81"), std::string::npos) << r.out;
    auto v = run_cli("--json voronoi eisenstein 5 1 5");
    ASSERT_EQ(v.code, 0) << v.err;
    json j = json::parse(v.out);
    EXPECT_LT(j["report"]["checks"][0]["value"].get<double>(), 1e-6);
}

TEST(Cli, MomentDirectAndTrend) {
    auto r = run_cli("--out m1 moment 5 1 direct4");
    ASSERT_EQ(r.code, 0) << r.err;
    json j = json::parse(slurp(workdir() / "m1.json"));
    const auto& rep = j["reports"][0];
    EXPECT_GE(rep["value"].get<double>(), 1 / (2 * kPi) - 1e-4);
    EXPECT_TRUE(j.contains("truncation"));

    auto t = run_cli("--out trend moment 5 1..6 spectral4 --cusp-only");
    ASSERT_EQ(t.code, 0) << t.err;
    auto rows = csv_rows(slurp(workdir() / "trend_trend.csv"));
    ASSERT_EQ(rows.size(), 7u);
    const double t1 = std::stod(rows[1][1]);
    for (int l = 1; l <= 6; ++l) {
        EXPECT_EQ(std::stoi(rows[l][0]), l);
        EXPECT_NEAR(std::stod(rows[l][1]), l * t1, 1e-12 * l * t1);
        // empty data: only the constant term
        EXPECT_EQ(std::stod(rows[l][2]), 1 / (2 * kPi));
    }
}

TEST(Cli, IngestComputesLValuesAndRejectsBadRecords) {
    const double t = 9.5;
    {
        std::ofstream f(workdir() / "records.json");
        f << json::array({eisenstein_record(t, 10000), eisenstein_record(t, 3000, 1.1)}).dump();
    }
    auto r = run_cli("--data records.json --out ing moment 5 1 spectral4 --cusp-only");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("record 1"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("Hecke relation fails at (m,n)"), std::string::npos) << r.err;
    json j = json::parse(slurp(workdir() / "ing.json"));
    const auto& rep = j["reports"][0];
    ASSERT_EQ(rep["ingested"].size(), 1u);
    ASSERT_EQ(rep["rejected"].size(), 1u);
    const auto& lv = rep["ingested"][0]["datum"]["lvalues"];
    // L(s, E_t ⊗ χ_D) = L(s + it, χ_D) L(s − it, χ_D); the untwisted series has poles and no clean AFE oracle
    double ll = std::norm(lfunc::dirichlet_L(cplx(0.5, t), 5));
    EXPECT_TRUE(std::isfinite(lv[spectral::keys::L_f].get<double>()));
    EXPECT_TRUE(std::isfinite(lv[spectral::keys::L_sym2].get<double>()));
    EXPECT_NEAR(lv[spectral::keys::L_f_chi].get<double>(), ll, 1e-6 * ll);
    EXPECT_EQ(rep["expansion"]["terms"].size(), 1u);
    EXPECT_EQ(rep["expansion"]["constant_term"].get<double>(), 1 / (2 * kPi));

    // shape errors are reported per record
    json broken = eisenstein_record(t, 50);
    broken["coeffs"][0][1] = 2.0;
    {
        std::ofstream f(workdir() / "broken.json");
        f << json{{"records", {broken}}}.dump();
    }
    auto b = run_cli("--data broken.json --out br moment 5 1 spectral4 --cusp-only");
    EXPECT_EQ(b.code, 1);
    EXPECT_NE(b.err.find("lambda(1) must equal 1"), std::string::npos) << b.err;
}

TEST(Cli, ValueAtOneMatchesNearbyEvaluation) {
    DihedralForm g = make_dihedral(5, 1, 0, 20000);
    std::vector<double> lam(20001);
    for (long long n = 1; n <= 20000; ++n) lam[n] = g.lambda(n);
    auto L = lfunc::sym2_descriptor(lam, g.t(), 1, 20000);
    double mean = cli::value_at_one(L);
    // L is analytic at 1; first-order Taylor step from a point just off the Γ pole
    double h = 1e-4;
    double a = lfunc::evaluate(L, 1 + h).real(), b = lfunc::evaluate(L, 1 + 2 * h).real();
    EXPECT_NEAR(mean, 2 * a - b, 1e-6 * std::abs(mean));
}

TEST(Cli, SpotCheckInProcess) {
    auto rec = cli::ExternalMaassRecord::from_json(eisenstein_record(4.0, 400));
    auto ok = cli::hecke_spot_check(rec, 1e-9, 7);
    EXPECT_TRUE(ok.ok);
    rec.lambda[6] += 0.5;
    bool caught = false;
    for (unsigned seed = 0; seed < 50 && !caught; ++seed) {
        auto sc = cli::hecke_spot_check(rec, 1e-9, seed);
        if (!sc.ok) {
            caught = true;
            EXPECT_TRUE(sc.m * sc.n % 6 == 0 || sc.m == 6 || sc.n == 6) << sc.m << " " << sc.n;
        }
    }
    EXPECT_TRUE(caught);
    EXPECT_THROW(cli::ExternalMaassRecord::from_json(json{{"level", 1}, {"t_f", 3.0}, {"parity", 0}, {"coeffs", json::array()}}),
                 std::invalid_argument);
}
