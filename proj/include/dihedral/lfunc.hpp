#pragma once

#include "arith.hpp"
#include "dihedral.hpp"
#include "special.hpp"

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/// @brief ζ, Dirichlet and GL(2) L-functions, AFE weights and L-value bookkeeping.
namespace dihedral::lfunc {

using special::log_gamma_R;
using cld = std::complex<long double>;

/// @brief Thrown when a coefficient table is too short for a smoothed sum.
struct insufficient_coefficients : std::runtime_error {
    long long required;
    insufficient_coefficients(long long req, long long have)
        : std::runtime_error("insufficient coefficients: need " + std::to_string(req) + ", have " +
                             std::to_string(have)),
          required(req) {}
};

namespace detail {

inline cld expm1_c(cld w) {
    if (std::abs(w) < 1e-3L) {
        cld term = w, sum = w;
        for (int k = 2; k < 12; ++k) {
            term *= w / (long double)k;
            sum += term;
        }
        return sum;
    }
    return std::exp(w) - 1.0L;
}

/// Σ_{n≥1} c(n) n^{−s} for c periodic mod q by Euler–Maclaurin on each residue class.
/// With pole = false the classes must sum to zero so the s = 1 singularity cancels.
inline cplx periodic_dirichlet(cplx s_in, const std::vector<int>& c, bool pole) {
    const long long q = static_cast<long long>(c.size());
    cld s(s_in.real(), s_in.imag());
    const int J = 22;
    long long K = std::max<long long>(12, static_cast<long long>((std::abs(s) + 2 * J) / 2) + 1);
    cld sum = 0;
    for (long long n = 1; n < q * K + 1; ++n) {
        int cn = c[n % q];
        if (cn) sum += (long double)cn * std::exp(-s * std::log((long double)n));
    }
    // tail: n = q(K + w) with w = a/q, a = 1..q; first tail index is qK + 1
    cld tail = 0;
    for (long long a = 1; a <= q; ++a) {
        int ca = c[a % q];
        if (!ca) continue;
        long double z = K + (long double)a / q;
        if (a == q) z = K + 1;
        long double lz = std::log(z);
        cld zs = std::exp(-s * lz);
        cld main;
        if (pole) main = std::exp((1.0L - s) * lz) / (s - 1.0L);
        else main = -lz * (std::abs(1.0L - s) < 1e-300L ? cld(1) : expm1_c((1.0L - s) * lz) / ((1.0L - s) * lz));
        cld t = main + zs / 2.0L;
        cld poch = s;  // s(s+1)...(s+2j−2)
        long double zp = 1.0L / z;
        for (int j = 1; j <= J; ++j) {
            long double b = boost::math::bernoulli_b2n<long double>(j) / boost::math::factorial<long double>(2 * j);
            t += b * poch * zs * zp;
            poch *= (s + (long double)(2 * j - 1)) * (s + (long double)(2 * j));
            zp /= z * z;
        }
        tail += (long double)ca * t;
    }
    cld r = sum + std::exp(-s * std::log((long double)q)) * tail;
    return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

inline std::vector<int> kronecker_table(long long D) {
    std::vector<int> c(static_cast<std::size_t>(D));
    for (long long a = 0; a < D; ++a) c[a] = arith::kronecker(D, a);
    return c;
}

} // namespace detail

/// @brief Riemann ζ(s), s ≠ 1.
inline cplx zeta(cplx s) {
    if (std::abs(s - 1.0) < 1e-14) throw special::pole_error("zeta: pole at s = 1");
    return detail::periodic_dirichlet(s, {1}, true);
}

/// @brief L(s, χ) for the Kronecker symbol χ = (D/·), D a nontrivial discriminant.
inline cplx dirichlet_L(cplx s, long long D) {
    if (D == 1) return zeta(s);
    return detail::periodic_dirichlet(s, detail::kronecker_table(D), false);
}

inline cplx dirichlet_L(cplx s, const QuadField& F) { return dirichlet_L(s, F.D); }

/// @brief λ_{χ,1}(m, t) = Σ_{ab=m} χ(a) a^{it} b^{−it}; χ = 1 when D = 1.
inline cplx lambda_chi1(long long D, long long m, double t) {
    cplx s = 0;
    for (long long a : arith::divisors(m)) {
        int c = D == 1 ? 1 : arith::kronecker(D, a);
        if (c) s += double(c) * std::exp(cplx(0, t * std::log(double(a) / double(m / a))));
    }
    return s;
}

/// @brief λ(m, t) = Σ_{ab=m} (a/b)^{it}, the Eisenstein eigenvalue; λ(m, 0) = d(m).
inline cplx lambda_t(long long m, double t) { return lambda_chi1(1, m, t); }

/// @brief Dirichlet coefficients of Π_p P_p(p^{−s})^{−1} for polynomials P_p with P_p(0) = 1.
inline std::vector<cplx> euler_coefficients(long long N, const std::function<std::vector<cplx>(long long)>& poly) {
    std::vector<cplx> a(static_cast<std::size_t>(N + 1), 0.0);
    if (N < 1) return a;
    auto spf = arith::spf_sieve(static_cast<int>(std::max<long long>(N, 2)));
    std::vector<std::vector<cplx>> local;  // per prime, series coefficients of 1/P
    a[1] = 1;
    std::vector<long long> pidx(static_cast<std::size_t>(N + 1), -1);
    for (long long n = 2; n <= N; ++n) {
        long long p = spf[n], m = n;
        int e = 0;
        while (m % p == 0) { m /= p; ++e; }
        if (m != 1) {
            a[n] = a[n / m] * a[m];
            continue;
        }
        if (e == 1) {
            auto P = poly(p);
            int kmax = 1;
            for (long long pk = p; pk <= N / p; pk *= p) ++kmax;
            std::vector<cplx> inv(static_cast<std::size_t>(kmax + 1), 0.0);
            inv[0] = 1;
            for (int k = 1; k <= kmax; ++k) {
                cplx v = 0;
                for (int j = 1; j < static_cast<int>(P.size()) && j <= k; ++j) v -= P[j] * inv[k - j];
                inv[k] = v;
            }
            pidx[p] = static_cast<long long>(local.size());
            local.push_back(std::move(inv));
        }
        a[n] = local[pidx[p]][e];
    }
    return a;
}

/// @brief An L-function: coefficients, conductor, Γ_R shifts and root number.
struct LDescriptor {
    std::string label;
    std::vector<cplx> coeff;  ///< coeff[n] for 1 ≤ n < size(); coeff[0] unused
    long long conductor = 1;
    std::vector<cplx> gamma_shifts;
    cplx root_number = 1;
    bool self_dual = true;

    long long length() const { return static_cast<long long>(coeff.size()) - 1; }
    int degree() const { return static_cast<int>(gamma_shifts.size()); }

    /// log Π Γ_R(s + μ_j)
    cplx log_gamma(cplx s) const {
        cplx v = 0;
        for (cplx mu : gamma_shifts) v += log_gamma_R(s + mu);
        return v;
    }
    cplx log_gamma_dual(cplx s) const {
        cplx v = 0;
        for (cplx mu : gamma_shifts) v += log_gamma_R(s + std::conj(mu));
        return v;
    }
    /// Λ(s) from a value of L(s).
    cplx complete(cplx s, cplx L) const {
        return L * std::exp(0.5 * s * std::log(double(conductor)) + log_gamma(s));
    }
    void validate() const {
        if (std::abs(std::abs(root_number) - 1) > 1e-12) throw std::invalid_argument("LDescriptor: |root_number| != 1");
        if (conductor < 1) throw std::invalid_argument("LDescriptor: conductor must be positive");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["label"] = label;
        j["conductor"] = conductor;
        j["self_dual"] = self_dual;
        j["root_number"] = {root_number.real(), root_number.imag()};
        auto sh = nlohmann::json::array();
        for (cplx m : gamma_shifts) sh.push_back({m.real(), m.imag()});
        j["gamma_shifts"] = sh;
        auto co = nlohmann::json::array();
        for (std::size_t n = 1; n < coeff.size(); ++n) co.push_back({coeff[n].real(), coeff[n].imag()});
        j["coeff"] = co;
        return j;
    }
    static LDescriptor from_json(const nlohmann::json& j) {
        LDescriptor d;
        d.label = j.value("label", "");
        d.conductor = j.at("conductor").get<long long>();
        d.self_dual = j.value("self_dual", true);
        d.root_number = {j.at("root_number")[0].get<double>(), j.at("root_number")[1].get<double>()};
        for (auto& m : j.at("gamma_shifts")) d.gamma_shifts.emplace_back(m[0].get<double>(), m[1].get<double>());
        d.coeff.assign(1, 0.0);
        for (auto& c : j.at("coeff")) d.coeff.emplace_back(c[0].get<double>(), c[1].get<double>());
        d.validate();
        return d;
    }
};

/// @brief Knobs for the smoothed approximate functional equation.
struct AfeOptions {
    double X = 1;          ///< balance parameter between the two sums
    double A = 0;          ///< smoothing width G(u) = e^{u²/A²}; 0 picks 7.7/degree
    double sigma = 1;      ///< abscissa of the Mellin–Barnes line
    double vmax = 400;     ///< hard cap on |Im u|; nodes stop once the integrand is negligible
    double h = 0.1;        ///< trapezoid step on the line
    double tol = 1e-15;    ///< cutoff for the weight when sizing the sums
};

/// @brief V(y) = (1/2πi)∫ y^{−u} G(u) γ(s+u)/γ(s) du/u on the line Re u = σ, discretised once.
class SmoothWeight {
public:
    SmoothWeight(const std::function<cplx(cplx)>& log_gamma_ratio, double A, const AfeOptions& o) {
        auto node = [&](int j) {
            cplx u(o.sigma, j * o.h);
            return std::pair{u, (o.h / (2 * kPi)) * std::exp(u * u / (A * A) + log_gamma_ratio(u)) / u};
        };
        // walk outward until the integrand has been negligible for a stretch
        std::vector<std::pair<cplx, cplx>> nodes{node(0)};
        double cmax = std::abs(nodes[0].second);
        const int jmax = static_cast<int>(std::ceil(o.vmax / o.h));
        for (int dir : {1, -1}) {
            int small = 0;
            for (int j = 1; j <= jmax && small < 40; ++j) {
                auto nd = node(dir * j);
                double a = std::abs(nd.second);
                cmax = std::max(cmax, a);
                small = a < 1e-24 * cmax ? small + 1 : 0;
                nodes.push_back(nd);
            }
        }
        for (auto& [u, c] : nodes)
            if (std::abs(c) > 1e-24 * cmax) {
                u_.push_back(u);
                c_.push_back(c);
                mass_ += std::abs(c);
            }
        sigma_ = o.sigma;
    }

    cplx operator()(double y) const {
        double ly = std::log(y);
        cplx s = 0;
        for (std::size_t j = 0; j < u_.size(); ++j) s += c_[j] * std::exp(-u_[j] * ly);
        return s;
    }

    /// Smallest y (on a geometric grid) beyond which |V(y)| (yY)^{−re} stays below tol,
    /// or below the rounding floor of the quadrature sum if that is larger.
    double cutoff(double tol, double Y = 1, double re = 0) const {
        double y = 0.5;
        int quiet = 0;
        for (int k = 0; k < 600; ++k, y *= 1.15) {
            double grow = re < 0 ? std::pow(y * Y, -re) : 1.0;
            double floor = 8e-16 * mass_ * std::pow(y, -sigma_);
            if (std::abs((*this)(y)) < std::max(tol / grow, 10 * floor)) {
                if (++quiet == 3) return y;
            } else {
                quiet = 0;
            }
        }
        throw std::runtime_error("SmoothWeight: weight does not decay on the search grid");
    }

private:
    std::vector<cplx> u_, c_;
    double mass_ = 0, sigma_ = 1;
};

namespace detail {

/// The two weights of the AFE at s, with each line placed right of the Γ poles.
struct AfePair {
    SmoothWeight v1, v2;
    long long n1, n2;
};

inline AfePair afe_pair(const LDescriptor& L, cplx s, const AfeOptions& o) {
    double A = o.A > 0 ? o.A : 7.7 / std::max(1, L.degree());
    double m1 = 1e300, m2 = 1e300;
    for (cplx mu : L.gamma_shifts) {
        m1 = std::min(m1, (s + mu).real());
        m2 = std::min(m2, (1.0 - s + std::conj(mu)).real());
    }
    AfeOptions o1 = o, o2 = o;
    o1.sigma = std::max(o.sigma, 0.5 - m1);
    o2.sigma = std::max(o.sigma, 0.5 - m2);
    SmoothWeight v1([&](cplx u) { return L.log_gamma(s + u) - L.log_gamma(s); }, A, o1);
    SmoothWeight v2([&](cplx u) { return L.log_gamma_dual(1.0 - s + u) - L.log_gamma_dual(1.0 - s); }, A, o2);
    const double rq = std::sqrt(double(L.conductor));
    double Y1 = o.X * rq, Y2 = rq / o.X;
    long long n1 = static_cast<long long>(std::ceil(v1.cutoff(o.tol, Y1, s.real()) * Y1));
    long long n2 = static_cast<long long>(std::ceil(v2.cutoff(o.tol, Y2, 1 - s.real()) * Y2));
    return {std::move(v1), std::move(v2), n1, n2};
}

} // namespace detail

/// @brief Number of terms each sum of the AFE needs at s.
inline std::pair<long long, long long> afe_lengths(const LDescriptor& L, cplx s, const AfeOptions& o = {}) {
    auto p = detail::afe_pair(L, s, o);
    return {p.n1, p.n2};
}

/// @brief L(s) by the smoothed approximate functional equation.
inline cplx evaluate(const LDescriptor& L, cplx s, const AfeOptions& o = {}) {
    L.validate();
    auto [v1, v2, n1, n2] = detail::afe_pair(L, s, o);
    const double rq = std::sqrt(double(L.conductor));
    long long need = std::max(n1, n2);
    if (need > L.length()) throw insufficient_coefficients(need, L.length());
    cplx s1 = 0, s2 = 0;
    for (long long n = 1; n <= n1; ++n) {
        if (L.coeff[n] == 0.0) continue;
        s1 += L.coeff[n] * std::exp(-s * std::log(double(n))) * v1(n / (o.X * rq));
    }
    for (long long n = 1; n <= n2; ++n) {
        if (L.coeff[n] == 0.0) continue;
        s2 += std::conj(L.coeff[n]) * std::exp((s - 1.0) * std::log(double(n))) * v2(n * o.X / rq);
    }
    cplx eps_s = L.root_number *
                 std::exp((0.5 - s) * std::log(double(L.conductor)) + L.log_gamma_dual(1.0 - s) - L.log_gamma(s));
    return s1 + eps_s * s2;
}

/// @brief Λ(s) = q^{s/2} L_∞(s) L(s).
inline cplx completed(const LDescriptor& L, cplx s, const AfeOptions& o = {}) { return L.complete(s, evaluate(L, s, o)); }

/// @brief Descriptor of L(s, χ_D).
inline LDescriptor dirichlet_descriptor(long long D, long long N) {
    LDescriptor d;
    d.label = "chi_" + std::to_string(D);
    d.coeff.assign(static_cast<std::size_t>(N + 1), 0.0);
    for (long long n = 1; n <= N; ++n) d.coeff[n] = arith::kronecker(D, n);
    d.conductor = D;
    d.gamma_shifts = {0.0};
    return d;
}

/// @brief Descriptor of L(s, g_ψ) for a dihedral form; N coefficients are taken from its table.
inline LDescriptor form_descriptor(const DihedralForm& g, long long N) {
    if (N > g.bound()) throw insufficient_coefficients(N, g.bound());
    LDescriptor d;
    d.label = "g_psi(D=" + std::to_string(g.level()) + ",ell=" + std::to_string(g.ell()) + ")";
    d.coeff.assign(static_cast<std::size_t>(N + 1), 0.0);
    const auto& tab = g.table();
    for (long long n = 1; n <= N; ++n) d.coeff[n] = static_cast<double>(tab[n]);
    d.conductor = g.level();
    double t = g.t(), a = g.kappa();
    d.gamma_shifts = {cplx(a, t), cplx(a, -t)};
    d.root_number = 1;
    return d;
}

/// @brief L(s, g_ψ) by the smoothed AFE; throws insufficient_coefficients when the table is short.
inline cplx gl2_L(cplx s, const DihedralForm& g, const AfeOptions& o = {}) {
    LDescriptor probe = form_descriptor(g, 1);
    auto [n1, n2] = afe_lengths(probe, s, o);
    long long need = std::max(n1, n2);
    if (need > g.bound()) throw insufficient_coefficients(need, g.bound());
    return evaluate(form_descriptor(g, need), s, o);
}

/// @brief Descriptor of f ⊗ χ_D for a newform f of level d1 | D with parity ε_f.
inline LDescriptor twist_descriptor(const std::vector<double>& lambda_f, double t_f, int eps_f, long long D) {
    LDescriptor d;
    d.label = "f x chi_D";
    long long N = static_cast<long long>(lambda_f.size()) - 1;
    d.coeff.assign(static_cast<std::size_t>(N + 1), 0.0);
    for (long long n = 1; n <= N; ++n) d.coeff[n] = lambda_f[n] * arith::kronecker(D, n);
    d.conductor = D * D;
    double a = eps_f == 1 ? 0 : 1;
    d.gamma_shifts = {cplx(a, t_f), cplx(a, -t_f)};
    d.root_number = double(eps_f);
    return d;
}

/// @brief Descriptor of f itself (level d1, Atkin–Lehner sign η_f(d1)).
inline LDescriptor newform_descriptor(const std::vector<double>& lambda_f, double t_f, int eps_f, long long d1,
                                      int eta) {
    LDescriptor d;
    d.label = "f";
    d.coeff.assign(lambda_f.size(), 0.0);
    for (std::size_t n = 1; n < lambda_f.size(); ++n) d.coeff[n] = lambda_f[n];
    d.conductor = d1;
    double a = eps_f == 1 ? 0 : 1;
    d.gamma_shifts = {cplx(a, t_f), cplx(a, -t_f)};
    d.root_number = double(eps_f * eta);
    return d;
}

/// @brief Descriptor of f ⊗ g_{ψ²} from the local Rankin–Selberg factors.
inline LDescriptor rankin_descriptor(const std::vector<double>& lambda_f, double t_f, int eps_f, long long d1,
                                     int eta, const DihedralForm& g2, long long N) {
    if (static_cast<long long>(lambda_f.size()) - 1 < N) throw insufficient_coefficients(N, lambda_f.size() - 1);
    const long long D = g2.level();
    LDescriptor d;
    d.label = "f x g_psi2";
    d.coeff = euler_coefficients(N, [&](long long p) -> std::vector<cplx> {
        double a = lambda_f[p], b = g2.lambda(p);
        int w = arith::kronecker(D, p);
        if (D % p == 0) {
            // g_{ψ²} contributes one unitary root λ_g(p); f is Steinberg when p | d1
            if (d1 % p == 0) return {1.0, -a * b};
            return {1.0, -a * b, b * b};
        }
        return {1.0, -a * b, a * a * w + b * b - 2.0 * w, -double(w) * a * b, double(w * w)};
    });
    d.conductor = D * D * d1;
    double s = eps_f == 1 ? 0 : 1, tg2 = g2.t();
    d.gamma_shifts = {cplx(s, t_f + tg2), cplx(s, t_f - tg2), cplx(s, -t_f + tg2), cplx(s, -t_f - tg2)};
    d.root_number = double(eta);
    return d;
}

/// @brief Descriptor of sym² f = ad f for f of squarefree level d1.
inline LDescriptor sym2_descriptor(const std::vector<double>& lambda_f, double t_f, long long d1, long long N) {
    LDescriptor d;
    d.label = "sym2 f";
    d.coeff = euler_coefficients(N, [&](long long p) -> std::vector<cplx> {
        double a = lambda_f[p];
        if (d1 % p == 0) return {1.0, -a * a};
        double m = a * a - 1;
        return {1.0, -m, m, -1.0};
    });
    d.conductor = d1 * d1;
    d.gamma_shifts = {0.0, cplx(0, 2 * t_f), cplx(0, -2 * t_f)};
    return d;
}

// ---------------------------------------------------------------- identities

enum class RamanujanCase { f_twist = 1, f_rankin = 2, eisenstein = 3, g_pair = 4 };

/// @brief Both sides of a Rankin–Selberg Dirichlet series identity, truncated at N.
struct IdentityResult {
    cplx lhs, rhs;
    double tail_bound;
};

/// @brief Inputs for the identities: f via its Hecke eigenvalues (trivial character, level d1 | D).
struct IdentityInputs {
    long long D = 5;
    std::vector<double> lambda_f;  ///< index n ≥ 1
    long long d1 = 1;
    const DihedralForm* g2 = nullptr;  ///< g_{ψ²} for cases 2 and 4
    double t = 0;
};

/// @brief Upper bound for Σ_{n>N} d_k(n) n^{−σ} from Σ_{n≤x} d_k(n) ≤ x(1 + log x)^{k−1}.
inline double divisor_tail(int k, double sigma, long long N) {
    if (!(sigma > 1)) throw std::domain_error("divisor_tail: needs sigma > 1");
    double a = sigma - 1, x = a * (1 + std::log(double(N)));
    // σ ∫_{log N}^∞ (1+u)^{k−1} e^{−a u} du
    return sigma * std::exp(a) * boost::math::tgamma(double(k), x) / std::pow(a, k);
}

/// @brief Evaluates both sides of one of the four Dirichlet series identities for Re s > 1.
inline IdentityResult verify_ramanujan_identity(cplx s, long long N, RamanujanCase c, const IdentityInputs& in) {
    const double sig = s.real();
    if (!(sig > 1.2)) throw std::domain_error("verify_ramanujan_identity: needs Re(s) > 1.2");
    auto needf = [&] {
        if (static_cast<long long>(in.lambda_f.size()) - 1 < N) throw insufficient_coefficients(N, in.lambda_f.size() - 1);
    };
    auto needg = [&] {
        if (!in.g2) throw std::invalid_argument("verify_ramanujan_identity: g_{psi^2} required");
        if (in.g2->bound() < N) throw insufficient_coefficients(N, in.g2->bound());
    };
    auto ns = [&](long long n, cplx z) { return std::exp(-z * std::log(double(n))); };
    cplx L2s = dirichlet_L(2.0 * s, in.D);
    // product of truncated series each bounded coefficientwise by d_k: returns value and error
    struct Factor {
        cplx v;
        double err;
    };
    auto combine = [](const std::vector<Factor>& fs) {
        cplx v = 1;
        double up = 1, lo = 1;
        for (auto& f : fs) {
            v *= f.v;
            up *= std::abs(f.v) + f.err;
            lo *= std::abs(f.v);
        }
        return Factor{v, up - lo};
    };
    IdentityResult r{};
    cplx S = 0;
    switch (c) {
    case RamanujanCase::f_twist: {
        needf();
        cplx a = 0, b = 0;
        for (long long n = 1; n <= N; ++n) {
            cplx z = ns(n, s);
            a += in.lambda_f[n] * z;
            b += in.lambda_f[n] * double(arith::kronecker(in.D, n)) * z;
            S += in.lambda_f[n] * lambda_chi1(in.D, n, 0) * z;
        }
        double e = divisor_tail(2, sig, N);
        auto lhs = combine({{a, e}, {b, e}});
        r.lhs = lhs.v;
        r.rhs = L2s * S;
        r.tail_bound = lhs.err + std::abs(L2s) * divisor_tail(4, sig, N);
        break;
    }
    case RamanujanCase::f_rankin: {
        needf();
        needg();
        long long d1 = in.d1;
        std::vector<double> lf = in.lambda_f;
        LDescriptor R = rankin_descriptor(lf, 0, 1, d1, 1, *in.g2, N);
        cplx a = 0;
        for (long long n = 1; n <= N; ++n) {
            cplx z = ns(n, s);
            a += R.coeff[n] * z;
            S += in.lambda_f[n] * in.g2->lambda(n) * z;
        }
        r.lhs = a;
        r.rhs = L2s * S;
        r.tail_bound = divisor_tail(4, sig, N) * (1 + std::abs(L2s));
        break;
    }
    case RamanujanCase::eisenstein: {
        const cplx it(0, in.t);
        r.lhs = zeta(s + it) * zeta(s - it) * dirichlet_L(s + it, in.D) * dirichlet_L(s - it, in.D);
        for (long long n = 1; n <= N; ++n) S += lambda_t(n, in.t) * lambda_chi1(in.D, n, 0) * ns(n, s);
        r.rhs = L2s * S;
        r.tail_bound = std::abs(L2s) * divisor_tail(4, sig, N);
        break;
    }
    case RamanujanCase::g_pair: {
        needg();
        const cplx it(0, in.t);
        cplx a = 0, b = 0;
        for (long long n = 1; n <= N; ++n) {
            double lg = in.g2->lambda(n);
            if (lg == 0) continue;
            a += lg * ns(n, s + it);
            b += lg * ns(n, s - it);
            S += lambda_t(n, in.t) * lg * ns(n, s);
        }
        double e = divisor_tail(2, sig, N);
        auto lhs = combine({{a, e}, {b, e}});
        r.lhs = lhs.v;
        r.rhs = L2s * S;
        r.tail_bound = lhs.err + std::abs(L2s) * divisor_tail(4, sig, N);
        break;
    }
    }
    return r;
}

// ---------------------------------------------------------------- AFE weights

enum class AfeKind { V1, V2, V2hol };

/// @brief Shifts a_j with V = (1/2πi)∫ e^{u²} x^{−u} Π Γ_R(a_j + u)/Γ_R(a_j) du/u.
inline std::vector<cplx> afe_weight_shifts(AfeKind kind, int eps, double t_or_k, double tg) {
    if (eps != 1 && eps != -1) throw std::invalid_argument("afe_weight: eps must be +1 or -1");
    double a = 1 - eps / 2.0;
    switch (kind) {
    case AfeKind::V1:
        return {cplx(a, t_or_k), cplx(a, -t_or_k), cplx(a, t_or_k), cplx(a, -t_or_k)};
    case AfeKind::V2: {
        double p = 2 * tg + t_or_k, m = 2 * tg - t_or_k;
        return {cplx(a, p), cplx(a, -p), cplx(a, m), cplx(a, -m)};
    }
    case AfeKind::V2hol: {
        double k = t_or_k;
        if (k < 2 || std::fmod(k, 2) != 0) throw std::invalid_argument("afe_weight: weight must be even >= 2");
        std::vector<cplx> v;
        for (int s1 : {1, -1})
            for (int s2 : {1, -1}) v.emplace_back(0.5 + (k + s1) / 2, s2 * 2 * tg);
        return v;
    }
    }
    return {};
}

/// @brief V₁^ε(x,t), V₂^ε(x,t) or V₂^hol(x,k) by quadrature on Re u = σ with Gaussian e^{u²}.
inline double afe_weight(AfeKind kind, int eps, double x, double t_or_k, double tg = 0, double sigma = 1) {
    if (!(x > 0)) throw std::domain_error("afe_weight: x must be positive");
    auto shifts = afe_weight_shifts(kind, eps, t_or_k, tg);
    auto lg = [&](cplx u) {
        cplx v = 0;
        for (cplx a : shifts) v += log_gamma_R(a + u) - log_gamma_R(a);
        return v;
    };
    AfeOptions o;
    o.sigma = sigma;
    o.h = 0.05;
    o.vmax = 40;  // e^{u²} is below 1e-600 there
    SmoothWeight w(lg, 1.0, o);
    return w(x).real();
}

// ---------------------------------------------------------------- conductors

enum class TwistCase { f, f_chi, f_g2 };

/// @brief Conductor and root number of f, f ⊗ χ_D, f ⊗ g_{ψ²} for f of level d1 | D.
/// Maaß f: eps_or_k = parity ε_f; holomorphic f: eps_or_k = weight k.
inline std::pair<long long, int> conductor_root_number(TwistCase c, long long D, long long d1, int eps_or_k,
                                                       int eta, bool holomorphic = false) {
    if (d1 < 1 || D % d1 != 0) throw std::invalid_argument("conductor_root_number: d1 must divide D");
    if (eta != 1 && eta != -1) throw std::invalid_argument("conductor_root_number: eta must be +-1");
    int arch = holomorphic ? ((eps_or_k / 2) % 2 ? -1 : 1) : eps_or_k;  // i^k for even k
    if (holomorphic && eps_or_k % 2) throw std::invalid_argument("conductor_root_number: weight must be even");
    if (!holomorphic && eps_or_k != 1 && eps_or_k != -1)
        throw std::invalid_argument("conductor_root_number: parity must be +-1");
    switch (c) {
    case TwistCase::f:
        return {d1, arch * (d1 == 1 ? 1 : eta)};
    case TwistCase::f_chi:
        return {D * D, arch};
    case TwistCase::f_g2:
        return {D * D * d1, d1 == 1 ? 1 : eta};
    }
    return {0, 0};
}

// ---------------------------------------------------------------- Watson–Ichino

/// @brief Completed values entering the cusp-form triple product.
struct CuspTripleInputs {
    int eps_f = 1;
    long long q1 = 1, q2 = 1;
    std::optional<double> Lambda_f, Lambda_f_chi, Lambda_f_g2;  ///< at s = 1/2
    std::optional<double> Lambda_ad_g, Lambda_sym2_f;           ///< at s = 1
};

/// @brief |⟨|g|², f⟩|² from completed L-values, with Λ(s, f⊗ad g) = Λ(s, f⊗χ_D)Λ(s, f⊗g_{ψ²}).
inline double watson_ichino_cusp(const CuspTripleInputs& in) {
    if (in.eps_f == -1) return 0.0;
    auto need = [](const std::optional<double>& v, const char* name) {
        if (!v) throw std::invalid_argument(std::string("watson_ichino: missing L-value ") + name);
        return *v;
    };
    double a = need(in.Lambda_f, "Lambda(1/2,f)"), b = need(in.Lambda_f_chi, "Lambda(1/2,f x chi)"),
           c = need(in.Lambda_f_g2, "Lambda(1/2,f x g_psi2)"), ad = need(in.Lambda_ad_g, "Lambda(1,ad g)"),
           s2 = need(in.Lambda_sym2_f, "Lambda(1,sym2 f)");
    return (1 + in.eps_f) / (16 * std::sqrt(double(in.q1)) * double(arith::nu(in.q2))) * a * b * c / (ad * ad * s2);
}

/// @brief Λ^{q}(s) = π^{−s/2}Γ(s/2)ζ(s) Π_{p|q}(1 − p^{−s}).
inline cplx completed_zeta_away(cplx s, long long q) {
    cplx v = std::exp(log_gamma_R(s)) * zeta(s);
    for (auto [p, e] : arith::factor(q)) v *= 1.0 - std::exp(-s * std::log(double(p)));
    return v;
}

/// @brief Λ(s, ad g_ψ) = Λ(s, χ_D) Λ(s, g_{ψ²}) for Re s ≥ 1/2.
inline cplx completed_ad(cplx s, const DihedralForm& g2, const AfeOptions& o = {}) {
    const long long D = g2.level();
    cplx lchi = dirichlet_L(s, D) * std::exp(0.5 * s * std::log(double(D)) + log_gamma_R(s));
    LDescriptor probe = form_descriptor(g2, 1);
    cplx lg = probe.complete(s, gl2_L(s, g2, o));
    return lchi * lg;
}

/// @brief ⟨|g|², E_∞(·,s)⟩ for g = g_ψ of level q1 = D (q2 = 1 unless given), Re s ≥ 1/2, s ≠ 1.
inline cplx watson_ichino_eisenstein(cplx s, const DihedralForm& g2, long long q2 = 1, const AfeOptions& o = {}) {
    if (std::abs(s - 1.0) < 1e-12) throw special::pole_error("watson_ichino_eisenstein: s = 1");
    const long long q1 = g2.level();
    cplx sb = std::conj(s);
    cplx ad1 = completed_ad(1.0, g2, o);
    cplx num = completed_zeta_away(sb, q1) * completed_ad(sb, g2, o);
    cplx den = ad1 * completed_zeta_away(2.0 * sb, q1);
    return num / (2.0 * std::exp(sb * std::log(double(q1))) * double(arith::nu(q2)) * den);
}

// ---------------------------------------------------------------- AFE for |ζ L(χ_D)|²

/// @brief The polar term R(X, D, t) of the AFE for |ζ(1/2+it) L(1/2+it, χ_D)|².
struct PolarTerm {
    double value;
    bool caution;  ///< |t| < 0.05: the term is large and cancels against the sums
};

/// As printed: 2Re(e^{w²}((X√D)^w + (√D/X)^w) Γ-ratio² ζ(1+2it) L(1+2it,χ_D) L(1,χ_D)), w = 1/2+it.
inline PolarTerm afe_polar_term_printed(double X, long long D, double t) {
    if (t == 0) throw special::pole_error("afe_polar_term: t = 0");
    const cplx w(0.5, t);
    double rD = std::sqrt(double(D));
    cplx pw = std::exp(w * std::log(X * rD)) + std::exp(w * std::log(rD / X));
    cplx gr = std::exp(log_gamma_R(cplx(1, 2 * t)) - log_gamma_R(cplx(0.5, t)) - log_gamma_R(cplx(0.5, -t)));
    cplx v = std::exp(w * w) * pw * gr * gr * zeta(cplx(1, 2 * t)) * dirichlet_L(cplx(1, 2 * t), D) *
             dirichlet_L(1.0, D);
    return {2 * v.real(), std::abs(t) < 0.05};
}

/// Residues of the completed integrand at w = ±1/2 ± it:
/// −2Re(e^{w²}/w · ((XD)^w + (D/X)^w) Γ-ratio² ζ(1+2it) L(1+2it,χ_D) L(1,χ_D)).
inline PolarTerm afe_polar_term(double X, long long D, double t) {
    if (t == 0) throw special::pole_error("afe_polar_term: t = 0");
    const cplx w(0.5, t);
    double d = double(D);
    cplx pw = std::exp(w * std::log(X * d)) + std::exp(w * std::log(d / X));
    cplx gr = std::exp(log_gamma_R(cplx(1, 2 * t)) - log_gamma_R(cplx(0.5, t)) - log_gamma_R(cplx(0.5, -t)));
    cplx v = std::exp(w * w) / w * pw * gr * gr * zeta(cplx(1, 2 * t)) * dirichlet_L(cplx(1, 2 * t), D) *
             dirichlet_L(1.0, D);
    return {-2 * v.real(), std::abs(t) < 0.05};
}

/// @brief Right side of the AFE for |ζ(1/2+it)L(1/2+it,χ_D)|² (two smoothed double sums plus R).
inline double zeta_chi_square_afe(double t, long long D, double X = 1) {
    auto shifts = afe_weight_shifts(AfeKind::V1, 1, t, 0);
    auto lg = [&](cplx u) {
        cplx v = 0;
        for (cplx a : shifts) v += log_gamma_R(a + u) - log_gamma_R(a);
        return v;
    };
    AfeOptions o;
    o.h = 0.05;
    SmoothWeight V(lg, 1.0, o);
    double ymax = V.cutoff(1e-17);
    double total = 0;
    for (double Y : {X * D, D / X}) {
        long long M = static_cast<long long>(ymax * Y) + 1;
        for (long long m = 1; m <= M; ++m) {
            cplx lm = lambda_t(m, t) * lambda_chi1(D, m, 0);
            if (std::abs(lm) == 0) continue;
            for (long long k = 1; m * k * k <= M; ++k) {
                int c = arith::kronecker(D, k);
                if (!c) continue;
                total += (lm * double(c) / (std::sqrt(double(m)) * double(k))).real() * V(m * double(k * k) / Y).real();
            }
        }
    }
    return total + afe_polar_term(X, D, t).value;
}

} // namespace dihedral::lfunc
