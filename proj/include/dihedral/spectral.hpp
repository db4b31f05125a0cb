#pragma once

#include "arith.hpp"
#include "automorphic.hpp"
#include "dihedral.hpp"
#include "lfunc.hpp"
#include "precision.hpp"
#include "special.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dihedral::spectral {

enum class DatumKind { maass, eisenstein_sample, holomorphic };

inline std::string to_string(DatumKind k) {
    switch (k) {
    case DatumKind::maass: return "maass";
    case DatumKind::eisenstein_sample: return "eisenstein_sample";
    case DatumKind::holomorphic: return "holomorphic";
    }
    return "?";
}

inline DatumKind datum_kind_from_string(const std::string& s) {
    if (s == "maass") return DatumKind::maass;
    if (s == "eisenstein_sample") return DatumKind::eisenstein_sample;
    if (s == "holomorphic") return DatumKind::holomorphic;
    throw std::invalid_argument("unknown datum kind: " + s);
}

/// L-value names carried by a datum.
namespace keys {
inline const std::string L_f = "L^d2(1/2,f)";
inline const std::string L_f_chi = "L(1/2,f x chi_D)";
inline const std::string L_f_g2 = "L(1/2,f x g_psi2)";
inline const std::string L_sym2 = "L^d2(1,sym2 f)";
/// |ζ^D(1/2+it)L(1/2+it,χ_D)L(1/2+it,g_{ψ²})/ζ^D(1+2it)|² for an Eisenstein sample
inline const std::string eis_abs2 = "eis_abs2";
} // namespace keys

/// @brief One spectral constituent: a Maaß or holomorphic newform of level d1 | D, or a weighted Eisenstein node.
struct SpectralDatum {
    DatumKind kind = DatumKind::maass;
    long long level = 1;                   ///< d1
    double eigen = 0;                      ///< t_f, t, or k_f
    int parity = 1;                        ///< ε_f for Maaß forms
    std::map<std::string, double> lvalues;
    std::map<long long, double> local_lambda; ///< λ_f(p) for p | D/d1
    double weight = 1;

    double need(const std::string& k) const {
        auto it = lvalues.find(k);
        if (it == lvalues.end()) throw std::invalid_argument("spectral datum: missing L-value " + k);
        return it->second;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = to_string(kind);
        j["level"] = level;
        j["eigen"] = eigen;
        j["parity"] = parity;
        j["lvalues"] = lvalues;
        nlohmann::json lp = nlohmann::json::object();
        for (auto [p, v] : local_lambda) lp[std::to_string(p)] = v;
        j["local_lambda"] = lp;
        j["weight"] = weight;
        return j;
    }

    static SpectralDatum from_json(const nlohmann::json& j) {
        SpectralDatum d;
        d.kind = datum_kind_from_string(j.at("kind").get<std::string>());
        d.level = j.value("level", 1LL);
        d.eigen = j.at("eigen").get<double>();
        d.parity = j.value("parity", 1);
        if (j.contains("lvalues")) d.lvalues = j.at("lvalues").get<std::map<std::string, double>>();
        if (j.contains("local_lambda"))
            for (auto& [k, v] : j.at("local_lambda").items()) d.local_lambda[std::stoll(k)] = v.get<double>();
        d.weight = j.value("weight", 1.0);
        if (d.parity != 1 && d.parity != -1) throw std::invalid_argument("spectral datum: parity must be +-1");
        return d;
    }
};

/// @brief Form-dependent constants shared by every assembly.
struct Context {
    long long D;
    double t_g;
    DihedralForm g2;  ///< g_{ψ²}
    double L1_chi;    ///< L(1, χ_D)
    double L1_g2;     ///< L(1, g_{ψ²})
    double Lambda1_ad;
    double vol;       ///< πν(D)/3
};

inline Context make_context(const DihedralForm& g) {
    DihedralForm g2 = make_dihedral(g.level(), 2 * g.ell(), g.kappa());
    const long long D = g.level();
    double l1c = lfunc::dirichlet_L(1.0, D).real();
    double l1g = lfunc::gl2_L(1.0, g2).real();
    double lam = lfunc::completed_ad(1.0, g2).real();
    return {D, g.t(), std::move(g2), l1c, l1g, lam, kPi * double(arith::nu(D)) / 3};
}

namespace detail {

/// Π_{p|d2} L_p(s, f) from local Hecke eigenvalues (f unramified at p).
inline double local_gl2(const SpectralDatum& f, long long d2, double s) {
    double v = 1;
    for (auto [p, e] : arith::factor(d2)) {
        auto it = f.local_lambda.find(p);
        if (it == f.local_lambda.end())
            throw std::invalid_argument("spectral datum: missing local eigenvalue at p = " + std::to_string(p));
        double x = std::pow(double(p), -s);
        v /= 1 - it->second * x + x * x;
    }
    return v;
}

/// Π_{p|d2} L_p(s, sym² f).
inline double local_sym2(const SpectralDatum& f, long long d2, double s) {
    double v = 1;
    for (auto [p, e] : arith::factor(d2)) {
        auto it = f.local_lambda.find(p);
        if (it == f.local_lambda.end())
            throw std::invalid_argument("spectral datum: missing local eigenvalue at p = " + std::to_string(p));
        double lam = it->second, x = std::pow(double(p), -s);
        v /= (1 - x) * (1 - (lam * lam - 2) * x + x * x);
    }
    return v;
}

inline double gamma_R_abs2(double sigma, double t) { return std::norm(special::gamma_R(cplx(sigma, t))); }

} // namespace detail

/// @brief |⟨|g|², f⟩|² for L²-normalised g, f, from the triple-product formula with completed L-values.
inline double triple_product_cusp(const Context& c, const SpectralDatum& f) {
    if (f.kind != DatumKind::maass) throw std::invalid_argument("triple_product_cusp: Maass datum required");
    if (c.D % f.level) throw std::invalid_argument("triple_product_cusp: level must divide D");
    if (f.parity == -1) return 0.0;
    const long long d1 = f.level, d2 = c.D / d1;
    const double t = f.eigen, tg2 = 2 * c.t_g;
    const double Lf = f.need(keys::L_f) * detail::local_gl2(f, d2, 0.5);
    const double Ls2 = f.need(keys::L_sym2) * detail::local_sym2(f, d2, 1.0);
    const double g_half = detail::gamma_R_abs2(0.5, t);
    lfunc::CuspTripleInputs in;
    in.eps_f = 1;
    in.q1 = d1;
    in.q2 = d2;
    in.Lambda_f = std::pow(double(d1), 0.25) * g_half * Lf;
    in.Lambda_f_chi = std::sqrt(double(c.D)) * g_half * f.need(keys::L_f_chi);
    in.Lambda_f_g2 = std::pow(double(c.D * c.D * d1), 0.25) * detail::gamma_R_abs2(0.5, t + tg2) *
                     detail::gamma_R_abs2(0.5, t - tg2) * f.need(keys::L_f_g2);
    in.Lambda_ad_g = c.Lambda1_ad;
    in.Lambda_sym2_f = double(d1) * detail::gamma_R_abs2(1.0, 2 * t) * Ls2;
    return lfunc::watson_ichino_cusp(in);
}

/// @brief Level-splitting factor 2^{ω(q2)} ν(q2) φ(q2)/q2² · L_{q2}(1, sym² f)/L_{q2}(1/2, f).
inline double splitting_factor(const Context& c, const SpectralDatum& f) {
    const long long d2 = c.D / f.level;
    double a = std::pow(2.0, arith::omega(d2)) * double(arith::nu(d2)) * double(arith::euler_phi(d2)) /
               (double(d2) * double(d2));
    if (d2 == 1) return a;
    return a * detail::local_sym2(f, d2, 1.0) / detail::local_gl2(f, d2, 0.5);
}

/// @brief Precomputed Eisenstein line 0 ≤ t ≤ T_max (integrands are even in t).
class EisensteinLine {
public:
    EisensteinLine() = default;

    EisensteinLine(const Context& c, double T_max, double panel = 1.0) : T_max_(T_max) {
        if (!(T_max > 0) || !(panel > 0)) throw std::invalid_argument("EisensteinLine: T_max and panel must be positive");
        using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
        using G = boost::math::quadrature::gauss<double, 10>;
        const auto& ka = GK::abscissa();
        const auto& kw = GK::weights();
        const auto& ga = G::abscissa();
        const auto& gw = G::weights();
        std::vector<double> gmatch(ka.size(), 0.0);
        for (std::size_t i = 0; i < ga.size(); ++i) {
            bool found = false;
            for (std::size_t j = 0; j < ka.size(); ++j)
                if (std::abs(ka[j] - ga[i]) < 1e-14) {
                    gmatch[j] = gw[i];
                    found = true;
                }
            if (!found) throw std::logic_error("EisensteinLine: Gauss nodes not embedded in Kronrod rule");
        }
        const int n = std::max(1, static_cast<int>(std::ceil(T_max / panel)));
        const double h = T_max / n;
        for (int k = 0; k < n; ++k) {
            const double m = (k + 0.5) * h, r = h / 2;
            for (std::size_t j = 0; j < ka.size(); ++j) {
                for (int sg : {1, -1}) {
                    if (sg == -1 && ka[j] == 0) continue;
                    t_.push_back(m + sg * r * ka[j]);
                    wk_.push_back(r * kw[j]);
                    wg_.push_back(r * gmatch[j]);
                }
            }
        }
        const long long D = c.D;
        finite_.resize(t_.size());
        wi_.resize(t_.size());
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const cplx s(0.5, t_[i]);
            const cplx s2(1.0, 2 * t_[i]);
            cplx zD = lfunc::zeta(s);
            cplx z2D = lfunc::zeta(s2);
            for (auto [p, e] : arith::factor(D)) {
                zD *= 1.0 - std::exp(-s * std::log(double(p)));
                z2D *= 1.0 - std::exp(-s2 * std::log(double(p)));
            }
            cplx lchi = lfunc::dirichlet_L(s, D);
            cplx lg2 = lfunc::gl2_L(s, c.g2);
            finite_[i] = std::norm(zD * lchi * lg2 / z2D);
            // completed form: Λ^D(s) Λ(s, χ_D) Λ(s, g_{ψ²}) / (Λ(1, ad g) Λ^D(1 + 2it)), all squared, over 4D
            double gam = std::norm(special::gamma_R(s)) * std::norm(special::gamma_R(s)) *
                         std::norm(special::gamma_R(s + cplx(0, 2 * c.t_g))) *
                         std::norm(special::gamma_R(s - cplx(0, 2 * c.t_g))) / std::norm(special::gamma_R(s2));
            double cond = double(D); // |D^{s/2}|² · |D^{s/2}|² at Re s = 1/2
            wi_[i] = cond * gam * finite_[i] / (c.Lambda1_ad * c.Lambda1_ad) / (4.0 * double(D));
        }
    }

    double T_max() const { return T_max_; }
    std::size_t size() const { return t_.size(); }
    const std::vector<double>& nodes() const { return t_; }
    const std::vector<double>& finite_values() const { return finite_; }
    const std::vector<double>& triple_values() const { return wi_; }

    /// ∫_{−T}^{T} w(t) v(t) dt over the nodes, with the Gauss/Kronrod difference as error estimate.
    std::pair<double, double> integrate(const std::vector<double>& v, const std::function<double(double)>& w) const {
        double k = 0, g = 0;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            double f = w(t_[i]) * v[i];
            k += wk_[i] * f;
            g += wg_[i] * f;
        }
        return {2 * k, 2 * std::abs(k - g)};
    }

private:
    double T_max_ = 0;
    std::vector<double> t_, wk_, wg_, finite_, wi_;
};

/// @brief Itemised contribution of one datum.
struct TermRecord {
    DatumKind kind;
    long long level;
    double eigen;
    double weight;
    double contribution;
    std::map<std::string, double> lvalues;
};

struct Truncation {
    double T_max = 0;
    double eis_quadrature_error = 0;
    double eis_tail_estimate = 0;  ///< decay-based estimate of ∫_{|t|>T_max}
    std::size_t skipped = 0;       ///< data not entering this expansion (holomorphic, odd)
};

/// @brief Constant term, cusp and Eisenstein partial sums, with budgets.
struct ExpansionReport {
    double constant_term = 0;
    double cusp_partial = 0;
    double eisenstein_partial = 0;
    Truncation truncation;
    double target = 0;          ///< limiting value of the assembled quantity
    double bulk_reference = 0;  ///< 2/vol, the bulk-range contribution in the limit
    std::vector<TermRecord> terms;

    double total() const { return constant_term + cusp_partial + eisenstein_partial; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["constant_term"] = constant_term;
        j["cusp_partial"] = cusp_partial;
        j["eisenstein_partial"] = eisenstein_partial;
        j["total"] = total();
        j["target"] = target;
        j["bulk_reference"] = bulk_reference;
        j["truncation"] = {{"T_max", truncation.T_max},
                           {"eis_quadrature_error", truncation.eis_quadrature_error},
                           {"eis_tail_estimate", truncation.eis_tail_estimate},
                           {"skipped", truncation.skipped}};
        auto arr = nlohmann::json::array();
        for (const auto& t : terms)
            arr.push_back({{"kind", to_string(t.kind)},
                           {"level", t.level},
                           {"eigen", t.eigen},
                           {"weight", t.weight},
                           {"lvalues", t.lvalues},
                           {"contribution", t.contribution}});
        j["terms"] = arr;
        return j;
    }
};

namespace detail {

inline ExpansionReport assemble(const Context& c, const std::function<double(double)>& mult2,
                                const std::vector<SpectralDatum>& data, const EisensteinLine* line) {
    ExpansionReport r;
    r.bulk_reference = 2 / c.vol;
    // deterministic order: by level, then eigenvalue
    std::vector<const SpectralDatum*> sorted;
    for (const auto& d : data) sorted.push_back(&d);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto a, auto b) {
        return a->level != b->level ? a->level < b->level : a->eigen < b->eigen;
    });
    for (const auto* d : sorted) {
        if (d->kind == DatumKind::holomorphic) {
            ++r.truncation.skipped;
            continue;
        }
        double v;
        if (d->kind == DatumKind::maass) {
            if (d->parity == -1) ++r.truncation.skipped;
            v = d->weight * splitting_factor(c, *d) * mult2(d->eigen) * triple_product_cusp(c, *d);
            r.cusp_partial += v;
        } else {
            // |⟨|g|², E(·, 1/2+it)⟩|² from the finite values, weight = quadrature weight
            double gam = std::pow(std::norm(special::gamma_R(cplx(0.5, d->eigen))), 2) *
                         std::norm(special::gamma_R(cplx(0.5, d->eigen + 2 * c.t_g))) *
                         std::norm(special::gamma_R(cplx(0.5, d->eigen - 2 * c.t_g))) /
                         std::norm(special::gamma_R(cplx(1.0, 2 * d->eigen)));
            double wi = gam * d->need(keys::eis_abs2) / (c.Lambda1_ad * c.Lambda1_ad) / 4.0;
            v = d->weight * std::pow(2.0, arith::omega(c.D)) / (4 * kPi) * mult2(d->eigen) * wi;
            r.eisenstein_partial += v;
        }
        r.terms.push_back({d->kind, d->level, d->eigen, d->weight, v, d->lvalues});
    }
    if (line) {
        auto [val, err] = line->integrate(line->triple_values(), mult2);
        const double pref = std::pow(2.0, arith::omega(c.D)) / (4 * kPi);
        r.eisenstein_partial += pref * val;
        r.truncation.T_max = line->T_max();
        r.truncation.eis_quadrature_error = pref * err;
        // beyond 2t_g the integrand decays at least like e^{−π(|t|−2t_g)}
        const auto& t = line->nodes();
        std::size_t last = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] > t[last]) last = i;
        double edge = pref * mult2(t[last]) * line->triple_values()[last];
        r.truncation.eis_tail_estimate = line->T_max() > 2 * c.t_g ? 2 * edge / kPi : HUGE_VAL;
    }
    return r;
}

} // namespace detail

/// @brief Var(g; R) spectrally: cusp data through the triple product, Eisenstein line by quadrature.
inline ExpansionReport variance_expansion(const Context& c, double R, const std::vector<SpectralDatum>& data,
                                          const EisensteinLine* line) {
    auto m2 = [R](double t) { double h = special::ball_multiplier(R, t); return h * h; };
    ExpansionReport r = detail::assemble(c, m2, data, line);
    r.target = 0;
    return r;
}

/// @brief ∫|g|⁴ spectrally: 1/vol plus the same sums with h_R ≡ 1.
inline ExpansionReport fourth_moment_spectral(const Context& c, const std::vector<SpectralDatum>& data,
                                              const EisensteinLine* line) {
    ExpansionReport r = detail::assemble(c, [](double) { return 1.0; }, data, line);
    r.constant_term = 1 / c.vol;
    r.target = 3 / c.vol;
    return r;
}

/// @brief ℳ^{Maaß}(h) + ℳ^{Eis}(h) (+ ℳ^{hol}(h_hol) when given) over the supplied data.
inline double mixed_moment(const Context& c, const std::function<double(double)>& h,
                           const std::vector<SpectralDatum>& data, const EisensteinLine* line,
                           const std::function<double(double)>* h_hol = nullptr) {
    const double w_eis = std::pow(2.0, arith::omega(c.D)) / (2 * kPi);
    double total = 0;
    auto checked = [](double v, double t) {
        if (!std::isfinite(v)) throw std::domain_error("mixed_moment: h not finite at t = " + std::to_string(t));
        return v;
    };
    for (const auto& d : data) {
        if (d.kind == DatumKind::eisenstein_sample) {
            total += d.weight * w_eis * d.need(keys::eis_abs2) * checked(h(d.eigen), d.eigen);
            continue;
        }
        if (d.kind == DatumKind::maass && d.parity == -1) continue;  // central values vanish by the root number
        if (d.kind == DatumKind::holomorphic && !h_hol) continue;
        if (c.D % d.level) throw std::invalid_argument("mixed_moment: level must divide D");
        const long long d2 = c.D / d.level;
        double a = std::pow(2.0, arith::omega(d2)) * double(arith::euler_phi(d2)) / double(d2);
        double hv = d.kind == DatumKind::maass ? h(d.eigen) : (*h_hol)(d.eigen);
        total += d.weight * a * d.need(keys::L_f) * d.need(keys::L_f_chi) * d.need(keys::L_f_g2) /
                 d.need(keys::L_sym2) * checked(hv, d.eigen);
    }
    if (line) total += w_eis * line->integrate(line->finite_values(), h).first;
    return total;
}

/// @brief h(t) = π H(t) m(t) / (8 D² L(1,χ_D)² L(1,g_{ψ²})²), regrouping the expansion as mixed moments.
inline std::function<double(double)> regrouped_weight(const Context& c, std::function<double(double)> m) {
    const double pre = kPi / (8.0 * c.D * c.D * std::pow(c.L1_chi * c.L1_g2, 2));
    const double tg = c.t_g;
    return [pre, tg, m](double t) { return pre * special::weight_H(t, tg) * m(t); };
}

/// @brief ∫|g|⁴ dμ by quadrature with g normalised through the closed-form ⟨g, g⟩.
struct DirectResult {
    double value;
    double error;
};

inline DirectResult fourth_moment_direct(const DihedralForm& g, double tol, automorphic::QuadratureOptions o = {}) {
    const double nrm = automorphic::norm_closed_form(g);
    o.Y = automorphic::cusp_height(g.level(), g.t(), o.Y);
    auto f = automorphic::form_evaluator(g, automorphic::domain_y_floor(g.level(), o.Y));
    o.tol = tol * nrm * nrm;
    auto r = automorphic::integrate_quotient([&](const automorphic::UpperHalfPoint& z) { return cplx(std::pow(std::norm(f(z)), 2)); },
                                             g.level(), o);
    return {r.value.real() / (nrm * nrm), r.error / (nrm * nrm)};
}

/// @brief Var(g; R) by quadrature: ball averages of |g|² in geodesic polar coordinates, then ∫(X − 1/vol)².
inline DirectResult variance_direct(const DihedralForm& g, double R, double tol, automorphic::QuadratureOptions o = {},
                                    int angular_nodes = 32) {
    using automorphic::UpperHalfPoint;
    const double nrm = automorphic::norm_closed_form(g);
    o.Y = automorphic::cusp_height(g.level(), g.t(), o.Y);
    const double floor = automorphic::domain_y_floor(g.level(), o.Y) * std::exp(-R);
    auto f = automorphic::form_evaluator(g, floor);
    const double vol = kPi * double(arith::nu(g.level())) / 3;
    const double vball = 2 * kPi * (std::cosh(R) - 1);
    using GL = boost::math::quadrature::gauss<double, 12>;
    const auto& xa = GL::abscissa();
    const auto& xw = GL::weights();
    std::vector<double> rn, rw;
    for (std::size_t i = 0; i < xa.size(); ++i)
        for (int sg : {1, -1}) {
            if (sg == -1 && xa[i] == 0) continue;
            double r = R / 2 * (1 + sg * xa[i]);
            rn.push_back(r);
            rw.push_back(R / 2 * xw[i] * std::sinh(r));
        }
    std::vector<cplx> offs;
    std::vector<double> wts;
    for (std::size_t i = 0; i < rn.size(); ++i)
        for (int k = 0; k < angular_nodes; ++k) {
            double th = 2 * kPi * k / angular_nodes;
            cplx zeta = std::tanh(rn[i] / 2) * std::polar(1.0, th);
            offs.push_back(cplx(0, 1) * (1.0 + zeta) / (1.0 - zeta));
            wts.push_back(rw[i] * 2 * kPi / angular_nodes);
        }
    auto X = [&](const UpperHalfPoint& w) {
        double s = 0;
        for (std::size_t i = 0; i < offs.size(); ++i) {
            cplx z = w.x + w.y * offs[i];
            s += wts[i] * std::norm(f(UpperHalfPoint(z.real(), z.imag())));
        }
        return s / (vball * nrm);
    };
    o.tol = tol;
    auto r = automorphic::integrate_quotient(
        [&](const UpperHalfPoint& w) { double d = X(w) - 1 / vol; return cplx(d * d); }, g.level(), o);
    // cusp strips beyond Y carry (1/vol)² per unit measure
    double strips = double(arith::nu(g.level())) / o.Y / (vol * vol);
    return {r.value.real() + strips, r.error};
}

} // namespace dihedral::spectral
