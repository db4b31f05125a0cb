// dihedral_cli: coefficient tables, point values, invariant suites, moment reports, local constants, Voronoi checks.
#include <dihedral/cli.hpp>
#include <dihedral/verify.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#ifndef DIHEDRAL_VERSION
#define DIHEDRAL_VERSION "0.0.0"
#endif

using namespace dihedral;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2 };

/// Bad user input; reported with usage text and exit 2.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Globals {
    std::string config_path, out, data;
    std::optional<int> precision;
    std::optional<double> quad_tol;
    bool json_stdout = false;
    cli::Config cfg;
};

json header(const Globals& g, const std::string& command) {
    return {{"version", DIHEDRAL_VERSION},
            {"command", command},
            {"precision", g.cfg.precision_json()},
            {"truncation", g.cfg.truncation_json()}};
}

std::string csv_header(const Globals& g, const std::string& command) {
    std::ostringstream os;
    os << "# dihedral_cli " << DIHEDRAL_VERSION << " " << command << "\n# precision " << g.cfg.precision_json().dump()
       << "\n# truncation " << g.cfg.truncation_json().dump() << "\n";
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::string num(double v, const Globals& g) { return to_decimal(v, std::min(g.cfg.precision.working_digits, 17)); }

DihedralForm form(long long D, long long ell, int kappa, long long bound) {
    try {
        return make_dihedral(D, ell, kappa, bound);
    } catch (const std::logic_error& e) {
        throw UsageError(e.what());
    }
}

std::vector<long long> ell_range(const std::string& s) {
    auto dots = s.find("..");
    try {
        if (dots == std::string::npos) return {std::stoll(s)};
        long long a = std::stoll(s.substr(0, dots)), b = std::stoll(s.substr(dots + 2));
        if (b < a) throw UsageError("empty ell range " + s);
        std::vector<long long> v;
        for (long long l = a; l <= b; ++l) v.push_back(l);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("ell must be an integer or a range a..b, got '" + s + "'");
    }
}

// ------------------------------------------------------------ tabulate

int cmd_tabulate(const Globals& g, long long D, long long ell, int kappa, long long N) {
    if (N < 1) throw UsageError("N must be positive");
    DihedralForm f = form(D, ell, kappa, std::max<long long>(N, 100));
    json j = header(g, "tabulate");
    json t = f.to_json(N);
    t["t_g"] = to_decimal(f.t_g(), std::min(g.cfg.precision.working_digits, 50));
    t["parity"] = f.parity();
    j["table"] = t;
    write_text(g.out, j.dump(1) + "\n");
    return kPass;
}

// ------------------------------------------------------------ eval

int cmd_eval(const Globals& g, long long D, long long ell, int kappa, const std::vector<double>& xy) {
    std::vector<std::pair<double, double>> pts;
    if (!g.data.empty()) {
        std::ifstream in(g.data);
        if (!in) throw UsageError("cannot read " + g.data);
        std::string line;
        while (std::getline(in, line)) {
            line = cli::trim(line);
            if (line.empty() || line[0] == '#' || !(std::isdigit(line[0]) || line[0] == '-' || line[0] == '.')) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double x, y;
            if (!(ls >> x >> y)) throw UsageError("bad point line: " + line);
            pts.emplace_back(x, y);
        }
    }
    if (xy.size() % 2) throw UsageError("points are given as pairs x y");
    for (std::size_t i = 0; i < xy.size(); i += 2) pts.emplace_back(xy[i], xy[i + 1]);
    if (pts.empty()) throw UsageError("no points given");
    double ymin = 1e300;
    for (auto& p : pts) {
        if (!(p.second > 0)) throw UsageError("y must be positive");
        ymin = std::min(ymin, p.second);
    }
    DihedralForm f = form(D, ell, kappa, g.cfg.coeff_bound);
    auto ev = automorphic::form_evaluator(f, std::min(0.05, ymin));
    std::ostringstream os;
    os << csv_header(g, "eval") << "x,y,re_g,im_g\n";
    for (auto [x, y] : pts) {
        cplx v = ev(automorphic::UpperHalfPoint(x, y));
        os << num(x, g) << ',' << num(y, g) << ',' << num(v.real(), g) << ',' << num(v.imag(), g) << '\n';
    }
    write_text(g.out, os.str());
    return kPass;
}

// ------------------------------------------------------------ verify

void print_summary(const verify::Report& r) {
    for (const auto& c : r.checks)
        std::printf("%-4s %-72s %.3e (tol %.1e)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value, c.tolerance);
}

void print_local_table(const json& rows) {
    std::printf("%-16s %3s  %-14s %-14s %s\n", "case", "q", "I'", "expected", "match");
    for (const auto& r : rows)
        std::printf("%-16s %3ld  %-14s %-14s %s%s\n", r["case"].get<std::string>().c_str(), r["q"].get<long>(),
                    r["value"].get<std::string>().c_str(), r["expected"].get<std::string>().c_str(),
                    r["match"].get<bool>() ? "yes" : "no", r["asserted"].get<bool>() ? "" : " (conjecture check)");
}

int finish(const Globals& g, const std::string& command, const verify::Report& r) {
    json j = header(g, command);
    j["report"] = r.to_json();
    if (g.json_stdout) std::cout << j.dump(1) << "\n";
    if (!g.out.empty()) write_text(g.out, j.dump(1) + "\n");
    if (!g.json_stdout) {
        if (r.suite == "local") print_local_table(r.info["table"]);
        print_summary(r);
        std::printf("%s: %zu checks, %.2f s\n", r.passed() ? "PASS" : "FAIL", r.checks.size(), r.seconds);
    }
    if (const auto* f = r.first_failure()) {
        std::fprintf(stderr, "first failing assertion: %s (value %.6e, tolerance %.3e)\n", f->name.c_str(), f->value,
                     f->tolerance);
        return kFail;
    }
    return r.passed() ? kPass : kFail;
}

int cmd_verify(const Globals& g, const std::string& suite) {
    verify::Report r;
    if (suite == "wi-eisenstein") r = verify::wi_eisenstein(5, 1, {1.5, 0.3});
    else r = verify::run(suite);
    return finish(g, "verify " + suite, r);
}

// ------------------------------------------------------------ local

int cmd_local(const Globals& g, const std::vector<long>& qs) {
    for (long q : qs)
        if (q < 2) throw UsageError("q must be a prime power >= 2");
    return finish(g, "local", verify::local(qs));
}

// ------------------------------------------------------------ voronoi

int cmd_voronoi(const Globals& g, const std::string& kind, long D, long d, long c, double center, double width) {
    std::unique_ptr<DihedralForm> f;
    std::optional<sums::VoronoiSeries> L;
    try {
        if (kind == "eisenstein") L = sums::VoronoiSeries::eisenstein(D);
        else if (kind == "dihedral") {
            f = std::make_unique<DihedralForm>(form(D, 1, 0, 40000));
            L = sums::VoronoiSeries::dihedral(*f);
        } else throw UsageError("kind must be eisenstein or dihedral");
        if (c < 1) throw UsageError("c must be positive");
        auto [lhs, rhs] = sums::voronoi_both_sides(*L, d, c, {center, width});
        verify::Report r{"voronoi"};
        double diff = std::abs(lhs.value - rhs.value), budget = lhs.truncation_error + rhs.truncation_error;
        r.expect_le("|lhs - rhs| within reported error", diff, budget);
        r.info = {{"kind", kind}, {"D", D}, {"d", d}, {"c", c}, {"center", center}, {"width", width},
                  {"lhs", lhs.to_json()}, {"rhs", rhs.to_json()}};
        return finish(g, "voronoi", r);
    } catch (const UsageError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// ------------------------------------------------------------ moment

struct MomentArgs {
    long long D = 5;
    std::string ell = "1";
    std::string mode;
    double R = 0;
    bool cusp_only = false;
};

int cmd_moment(const Globals& g, const MomentArgs& a) {
    if (a.mode != "direct4" && a.mode != "spectral4" && a.mode != "variance")
        throw UsageError("mode must be direct4, spectral4 or variance");
    if (a.mode == "variance" && !(a.R > 0)) throw UsageError("variance needs a radius R > 0");
    const auto ells = ell_range(a.ell);
    json data_json;
    if (!g.data.empty()) {
        if (a.mode == "direct4") throw UsageError("--data applies to spectral modes only");
        std::ifstream in(g.data);
        if (!in) throw UsageError("cannot read " + g.data);
        try {
            in >> data_json;
        } catch (const json::exception& e) {
            throw UsageError(std::string("data file is not JSON: ") + e.what());
        }
    }
    const std::string prefix = g.out.empty() ? "moment_D" + std::to_string(a.D) + "_" + a.mode : g.out;
    json j = header(g, "moment");
    j["mode"] = a.mode;
    j["D"] = a.D;
    if (a.mode == "variance") j["R"] = a.R;
    auto reports = json::array();
    std::ostringstream terms, trend;
    terms << csv_header(g, "moment " + a.mode) << "ell,kind,level,eigen,weight,contribution\n";
    trend << csv_header(g, "moment " + a.mode);
    trend << (a.mode == "direct4" ? "ell,t_g,direct,error,floor\n"
                                  : "ell,t_g,constant_term,cusp_partial,eisenstein_partial,total,target,T_max\n");
    bool ok = true;
    std::vector<std::string> rejected_all;
    for (long long ell : ells) {
        DihedralForm f = form(a.D, ell, 0, g.cfg.coeff_bound);
        auto ctx = spectral::make_context(f);
        json rep;
        rep["ell"] = ell;
        rep["t_g"] = to_decimal(f.t_g(), std::min(g.cfg.precision.working_digits, 50));
        if (a.mode == "direct4") {
            automorphic::QuadratureOptions qo;
            qo.max_subdivisions = std::min(qo.max_subdivisions, g.cfg.precision.max_subdivisions);
            auto r = spectral::fourth_moment_direct(f, g.cfg.moment_tol, qo);
            const double floor = 1 / ctx.vol;
            const bool pass = r.value >= floor - g.cfg.moment_tol - r.error;
            ok = ok && pass;
            rep["value"] = r.value;
            rep["error"] = r.error;
            rep["floor"] = floor;
            rep["floor_holds"] = pass;
            trend << ell << ',' << num(ctx.t_g, g) << ',' << num(r.value, g) << ',' << num(r.error, g) << ','
                  << num(floor, g) << '\n';
        } else {
            std::vector<spectral::SpectralDatum> data;
            if (!data_json.is_null()) {
                auto in = cli::ingest(data_json, ctx, g.cfg);
                data = std::move(in.data);
                rep["ingested"] = in.accepted;
                rep["rejected"] = in.rejected;
                for (auto& m : in.rejected) rejected_all.push_back("ell=" + std::to_string(ell) + " " + m);
            }
            std::unique_ptr<spectral::EisensteinLine> line;
            if (!a.cusp_only) line = std::make_unique<spectral::EisensteinLine>(ctx, 2 * ctx.t_g + g.cfg.T_pad, g.cfg.eis_panel);
            auto r = a.mode == "spectral4" ? spectral::fourth_moment_spectral(ctx, data, line.get())
                                           : spectral::variance_expansion(ctx, a.R, data, line.get());
            rep["expansion"] = r.to_json();
            for (const auto& t : r.terms)
                terms << ell << ',' << spectral::to_string(t.kind) << ',' << t.level << ',' << num(t.eigen, g) << ','
                      << num(t.weight, g) << ',' << num(t.contribution, g) << '\n';
            terms << ell << ",constant,0,0,1," << num(r.constant_term, g) << '\n';
            if (line) terms << ell << ",eisenstein_integral,0,0,1," << num(r.eisenstein_partial, g) << '\n';
            trend << ell << ',' << num(ctx.t_g, g) << ',' << num(r.constant_term, g) << ',' << num(r.cusp_partial, g) << ','
                  << num(r.eisenstein_partial, g) << ',' << num(r.total(), g) << ',' << num(r.target, g) << ','
                  << num(r.truncation.T_max, g) << '\n';
        }
        reports.push_back(rep);
    }
    j["reports"] = reports;
    write_text(prefix + ".json", j.dump(1) + "\n");
    write_text(prefix + "_trend.csv", trend.str());
    if (a.mode != "direct4") write_text(prefix + "_terms.csv", terms.str());
    std::printf("wrote %s.json, %s_trend.csv%s\n", prefix.c_str(), prefix.c_str(),
                a.mode == "direct4" ? "" : (", " + prefix + "_terms.csv").c_str());
    for (const auto& m : rejected_all) std::fprintf(stderr, "rejected %s\n", m.c_str());
    if (!ok) std::fprintf(stderr, "fourth moment below the floor 1/vol\n");
    return ok && rejected_all.empty() ? kPass : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dihedral Maass forms: coefficients, invariants, moments, local constants"};
    app.set_version_flag("--version", DIHEDRAL_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config_path, "key = value file with precision and truncation settings")->check(CLI::ExistingFile);
    app.add_option("--precision", g.precision, "working decimal digits (>= 25)");
    app.add_option("--quad-tol", g.quad_tol, "quadrature tolerance");
    app.add_option("--out", g.out, "output file (prefix for moment)");
    app.add_option("--data", g.data, "input data file");
    app.add_flag("--json", g.json_stdout, "print the JSON report on stdout");

    long long D = 5, ell = 1, N = 100;
    int kappa = 0;
    auto* tab = app.add_subcommand("tabulate", "write the coefficient table as JSON");
    tab->add_option("D", D, "fundamental discriminant")->required();
    tab->add_option("ell", ell, "Grossencharacter frequency")->required();
    tab->add_option("N", N, "number of coefficients")->required();
    tab->add_option("--kappa", kappa, "archimedean sign type (0 or 1)");

    std::vector<double> xy;
    auto* ev = app.add_subcommand("eval", "evaluate g at points; CSV x,y,re_g,im_g");
    ev->add_option("D", D)->required();
    ev->add_option("ell", ell)->required();
    ev->add_option("xy", xy, "x1 y1 x2 y2 ...");
    ev->add_option("--kappa", kappa);

    std::string suite;
    auto* ver = app.add_subcommand("verify", "run an invariant suite");
    ver->add_option("suite", suite)->required()->check(CLI::IsMember(verify::suite_names()));

    MomentArgs ma;
    std::vector<std::string> mode_args;
    auto* mom = app.add_subcommand("moment", "fourth moment or variance report");
    mom->add_option("D", ma.D)->required();
    mom->add_option("ell", ma.ell, "integer or range a..b")->required();
    mom->add_option("mode", mode_args, "direct4 | spectral4 | variance R")->required()->expected(1, 2);
    mom->add_flag("--cusp-only", ma.cusp_only, "skip the Eisenstein integral");

    std::vector<long> qs{2, 3, 5, 7};
    auto* loc = app.add_subcommand("local", "exact local constants table");
    loc->add_option("--q", qs, "residue field sizes")->delimiter(',');

    std::string kind;
    long vd = 1, vc = 5;
    double center = 100, width = 10;
    auto* vor = app.add_subcommand("voronoi", "both sides of the Voronoi formula for a Gaussian weight");
    vor->add_option("kind", kind, "eisenstein | dihedral")->required();
    vor->add_option("D", D)->required();
    vor->add_option("d", vd)->required();
    vor->add_option("c", vc)->required();
    vor->add_option("--center", center);
    vor->add_option("--width", width);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    }

    try {
        if (!g.config_path.empty()) {
            std::ifstream in(g.config_path);
            cli::load_config(g.cfg, in);
        }
        if (g.precision) g.cfg.precision.working_digits = *g.precision;
        if (g.quad_tol) g.cfg.precision.quad_tol = *g.quad_tol;
        g.cfg.validate();

        if (*tab) return cmd_tabulate(g, D, ell, kappa, N);
        if (*ev) return cmd_eval(g, D, ell, kappa, xy);
        if (*ver) return cmd_verify(g, suite);
        if (*loc) return cmd_local(g, qs);
        if (*vor) return cmd_voronoi(g, kind, D, vd, vc, center, width);
        if (*mom) {
            ma.mode = mode_args[0];
            if (mode_args.size() == 2) {
                try {
                    ma.R = std::stod(mode_args[1]);
                } catch (const std::logic_error&) {
                    throw UsageError("R must be a number");
                }
            }
            return cmd_moment(g, ma);
        }
    } catch (const UsageError& e) {
        auto subs = app.get_subcommands();
        std::fprintf(stderr, "error: %s\n\n%s", e.what(), (subs.empty() ? app.help() : subs[0]->help()).c_str());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFail;
    }
    return kUsage;
}
