#pragma once

#include <dihedral/spectral.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace dihedral::cli {

/// @brief Key/value settings from a config file; flags applied later win.
struct Config {
    PrecisionPolicy precision;
    long long coeff_bound = 20000;  ///< dense coefficient table for the dihedral form
    double moment_tol = 1e-6;       ///< absolute tolerance of the fourth-moment quadrature
    double T_pad = 15;              ///< Eisenstein line runs to 2 t_g + T_pad
    double eis_panel = 0.5;
    double hecke_tol = 1e-6;        ///< spot-check tolerance for ingested coefficients
    unsigned seed = 20240601;       ///< spot-check pair sampler

    void set(const std::string& key, const std::string& v) {
        if (key == "working_digits") precision.working_digits = std::stoi(v);
        else if (key == "quad_tol") precision.quad_tol = std::stod(v);
        else if (key == "max_subdivisions") precision.max_subdivisions = std::stoi(v);
        else if (key == "coeff_bound") coeff_bound = std::stoll(v);
        else if (key == "moment_tol") moment_tol = std::stod(v);
        else if (key == "T_pad") T_pad = std::stod(v);
        else if (key == "eis_panel") eis_panel = std::stod(v);
        else if (key == "hecke_tol") hecke_tol = std::stod(v);
        else if (key == "seed") seed = static_cast<unsigned>(std::stoul(v));
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    void validate() const {
        precision.validate();
        if (coeff_bound < 100) throw std::invalid_argument("config: coeff_bound must be at least 100");
        if (!(moment_tol > 0) || !(T_pad > 0) || !(eis_panel > 0) || !(hecke_tol > 0))
            throw std::invalid_argument("config: tolerances and truncation bounds must be positive");
    }

    nlohmann::json precision_json() const {
        return {{"working_digits", precision.working_digits},
                {"quad_tol", precision.quad_tol},
                {"max_subdivisions", precision.max_subdivisions}};
    }
    nlohmann::json truncation_json() const {
        return {{"coeff_bound", coeff_bound}, {"moment_tol", moment_tol}, {"T_pad", T_pad},
                {"eis_panel", eis_panel},     {"hecke_tol", hecke_tol},   {"seed", seed}};
    }
};

inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// @brief Reads `key = value` lines; `#` starts a comment, `[section]` headers and quotes are ignored.
inline void load_config(Config& c, std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty() || line.front() == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        std::string v = trim(line.substr(eq + 1));
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        try {
            c.set(trim(line.substr(0, eq)), v);
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

/// @brief A Hecke–Maaß newform supplied from outside: level, spectral parameter, parity, λ(n).
struct ExternalMaassRecord {
    long long level = 1;
    double t_f = 0;
    int parity = 1;
    std::vector<double> lambda;  ///< lambda[n] for 1 ≤ n < size(); lambda[0] unused
    std::string source;

    long long length() const { return static_cast<long long>(lambda.size()) - 1; }

    static double number(const nlohmann::json& v) {
        return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>();
    }

    /// Parses and checks shape: contiguous n from 1, λ(1) = 1, parity ±1.
    static ExternalMaassRecord from_json(const nlohmann::json& j) {
        ExternalMaassRecord r;
        r.level = j.at("level").get<long long>();
        r.t_f = number(j.at("t_f"));
        r.parity = j.at("parity").get<int>();
        r.source = j.value("source", "");
        if (r.level < 1) throw std::invalid_argument("level must be positive");
        if (r.parity != 1 && r.parity != -1) throw std::invalid_argument("parity must be +1 or -1");
        if (!(r.t_f > 0)) throw std::invalid_argument("t_f must be positive");
        r.lambda.assign(1, 0.0);
        long long expect = 1;
        for (const auto& c : j.at("coeffs")) {
            long long n = c.at(0).get<long long>();
            if (n != expect) throw std::invalid_argument("coeffs must list n = 1, 2, 3, ... in order; found n = " + std::to_string(n));
            r.lambda.push_back(number(c.at(1)));
            ++expect;
        }
        if (r.length() < 1) throw std::invalid_argument("coeffs are empty");
        if (std::abs(r.lambda[1] - 1) > 1e-12) throw std::invalid_argument("lambda(1) must equal 1");
        return r;
    }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (long long n = 1; n <= length(); ++n) arr.push_back({n, to_decimal(lambda[n], 17)});
        return {{"level", level}, {"t_f", to_decimal(t_f, 17)}, {"parity", parity}, {"coeffs", arr}, {"source", source}};
    }
};

/// @brief First (m, n) among `pairs` random pairs violating λ(m)λ(n) = Σ_{d | (m,n), (d,N)=1} λ(mn/d²).
struct SpotCheck {
    bool ok = true;
    long long m = 0, n = 0;
    double deviation = 0;
};

inline SpotCheck hecke_spot_check(const ExternalMaassRecord& r, double tol, unsigned seed, int pairs = 20) {
    const long long N = r.length();
    const long long top = static_cast<long long>(std::sqrt(double(N)));
    if (top < 2) throw std::invalid_argument("too few coefficients for a Hecke spot check");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long long> U(2, top);
    SpotCheck out;
    for (int k = 0; k < pairs; ++k) {
        long long m = U(rng), n = U(rng);
        double rhs = 0;
        for (long long d : arith::divisors(std::gcd(m, n)))
            if (std::gcd(d, r.level) == 1) rhs += r.lambda[m * n / (d * d)];
        double dev = std::abs(r.lambda[m] * r.lambda[n] - rhs);
        if (dev > tol * (1 + std::abs(rhs))) return {false, m, n, dev};
        out.deviation = std::max(out.deviation, dev);
    }
    return out;
}

/// @brief Re L(1) as the mean of L over a small circle about 1; the AFE splits Λ through Γ_R(1 − s), which has a pole there.
inline double value_at_one(const lfunc::LDescriptor& L, double radius = 0.05, int nodes = 16) {
    double mean = 0;
    for (int k = 0; k < nodes; ++k)
        mean += lfunc::evaluate(L, 1.0 + radius * std::polar(1.0, 2 * kPi * (k + 0.5) / nodes)).real();
    return mean / nodes;
}

/// @brief L-values the spectral assembly reads, computed from the supplied coefficients.
inline spectral::SpectralDatum to_datum(const ExternalMaassRecord& r, const spectral::Context& ctx) {
    const long long D = ctx.D;
    if (D % r.level) throw std::invalid_argument("level " + std::to_string(r.level) + " does not divide D");
    if (r.level > 1 && !arith::is_prime(r.level)) throw std::invalid_argument("only prime or unit levels are supported");
    spectral::SpectralDatum d;
    d.level = r.level;
    d.eigen = r.t_f;
    d.parity = r.parity;
    const long long d2 = D / r.level;
    for (auto [p, e] : arith::factor(d2)) {
        if (p > r.length()) throw lfunc::insufficient_coefficients(p, r.length());
        d.local_lambda[p] = r.lambda[p];
    }
    // Steinberg at p = d1: λ(p) = −η p^{−1/2}
    int eta = 1;
    if (r.level > 1) {
        if (r.level > r.length()) throw lfunc::insufficient_coefficients(r.level, r.length());
        eta = r.lambda[r.level] < 0 ? 1 : -1;
    }
    auto value = [&](const lfunc::LDescriptor& L, double s) { return lfunc::evaluate(L, s).real(); };
    const long long N = r.length();
    d.lvalues[spectral::keys::L_f] =
        value(lfunc::newform_descriptor(r.lambda, r.t_f, r.parity, r.level, eta), 0.5) / spectral::detail::local_gl2(d, d2, 0.5);
    d.lvalues[spectral::keys::L_f_chi] = value(lfunc::twist_descriptor(r.lambda, r.t_f, r.parity, D), 0.5);
    d.lvalues[spectral::keys::L_f_g2] =
        value(lfunc::rankin_descriptor(r.lambda, r.t_f, r.parity, r.level, eta, ctx.g2, N), 0.5);
    d.lvalues[spectral::keys::L_sym2] =
        value_at_one(lfunc::sym2_descriptor(r.lambda, r.t_f, r.level, N)) / spectral::detail::local_sym2(d, d2, 1.0);
    return d;
}

/// @brief Outcome of ingesting a data file: accepted data and one message per rejected record.
struct Ingested {
    std::vector<spectral::SpectralDatum> data;
    std::vector<std::string> rejected;
    nlohmann::json accepted = nlohmann::json::array();
};

/// @brief Accepts either a list of records or {"records": [...]}.
inline Ingested ingest(const nlohmann::json& j, const spectral::Context& ctx, const Config& cfg) {
    const nlohmann::json& list = j.is_array() ? j : j.at("records");
    Ingested out;
    std::size_t idx = 0;
    for (const auto& item : list) {
        const std::string tag = "record " + std::to_string(idx++);
        try {
            auto rec = ExternalMaassRecord::from_json(item);
            auto sc = hecke_spot_check(rec, cfg.hecke_tol, cfg.seed);
            if (!sc.ok) {
                std::ostringstream os;
                os << tag << " (" << rec.source << "): Hecke relation fails at (m,n) = (" << sc.m << "," << sc.n
                   << "), deviation " << sc.deviation;
                out.rejected.push_back(os.str());
                continue;
            }
            auto d = to_datum(rec, ctx);
            out.data.push_back(d);
            out.accepted.push_back({{"source", rec.source}, {"max_spot_deviation", sc.deviation}, {"datum", d.to_json()}});
        } catch (const std::exception& e) {
            out.rejected.push_back(tag + ": " + e.what());
        }
    }
    return out;
}

} // namespace dihedral::cli
