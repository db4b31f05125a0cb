#pragma once

#include "arith.hpp"
#include "precision.hpp"
#include "quadfield.hpp"

#include <boost/math/constants/constants.hpp>
#include <json.hpp>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace dihedral {

/// @brief Hecke Größencharakter of trivial conductor on Q(√D).
struct Grossenchar {
    QuadField field;
    long long ell = 0;
    int kappa = 0;
    int class_char_index = 0;

    /// ψ((α)) = sgn(α σα)^κ |α/σα|^{πiℓ/log ε}, returned as (sign, phase angle).
    std::pair<int, Real50> psi_polar(const QInt& alpha) const {
        Integer N = field.norm(alpha);
        int sg = (kappa == 1 && N < 0) ? -1 : 1;
        Real50 ang = boost::math::constants::pi<Real50>() * ell * field.log_ratio(alpha) / field.eps_log;
        return {sg, ang};
    }

    std::complex<Real50> psi(const QInt& alpha) const {
        auto [sg, ang] = psi_polar(alpha);
        return {sg * boost::multiprecision::cos(ang), sg * boost::multiprecision::sin(ang)};
    }
};

/// @brief Validates (ℓ, κ, class character) against the field and returns the character.
inline Grossenchar make_character(const QuadField& F, long long ell, int kappa, int class_char_index = 0) {
    if (kappa != 0 && kappa != 1) throw std::invalid_argument("make_character: kappa must be 0 or 1");
    if (kappa == 1 && F.unit_norm == -1)
        throw std::invalid_argument("make_character: kappa = 1 is incompatible with a unit of norm -1");
    if (F.class_number != 1)
        throw std::domain_error("make_character: class number > 1 is not supported for evaluation");
    if (class_char_index != 0)
        throw std::invalid_argument("make_character: class character index out of range");
    if (ell == 0)
        throw std::invalid_argument("make_character: character factors through the norm (ell = 0, real class character)");
    return {F, ell, kappa, class_char_index};
}

/// @brief Per-prime data of a field, shared by all characters on it.
struct PrimeDatum {
    SplitType type;
    Quad ratio_over_eps; ///< log|π/σπ| / log ε for a generator π (split/ramified)
    int norm_sign;       ///< sign of N(π)
};

namespace detail {

class PrimeTable {
public:
    explicit PrimeTable(QuadField F)
        : F_(std::move(F)), wp_(F_.w_plus), wm_(F_.w_minus), eps_log_(F_.eps_log) {}

    const PrimeDatum& get(long long p) {
        {
            std::lock_guard<std::mutex> lk(m_);
            auto it = data_.find(p);
            if (it != data_.end()) return it->second;
        }
        PrimeDatum d = compute(p);
        std::lock_guard<std::mutex> lk(m_);
        return data_.emplace(p, d).first->second;
    }

private:
    PrimeDatum compute(long long p) const {
        SplitType st = split_type(F_, p);
        if (st == SplitType::inert) return {st, Quad(0), 1};
        QInt g = prime_generator_raw(F_, p);
        // log|α/σα| = ±(2 log|larger conjugate| - log p), evaluated in quad precision
        Quad a(g.a.convert_to<long long>()), b(g.b.convert_to<long long>());
        Quad x = abs(a + b * wp_), y = abs(a + b * wm_);
        Quad lp = log(Quad(p));
        Quad r = x >= y ? 2 * log(x) - lp : lp - 2 * log(y);
        return {st, r / eps_log_, F_.norm(g) < 0 ? -1 : 1};
    }

    QuadField F_;
    Quad wp_, wm_, eps_log_;
    std::mutex m_;
    std::unordered_map<long long, PrimeDatum> data_;
};

inline std::shared_ptr<PrimeTable> prime_table(const QuadField& F) {
    static std::mutex m;
    static std::map<long long, std::shared_ptr<PrimeTable>> reg;
    std::lock_guard<std::mutex> lk(m);
    auto& slot = reg[F.D];
    if (!slot) slot = std::make_shared<PrimeTable>(F);
    return slot;
}

} // namespace detail

/// @brief Dihedral Maaß newform g_ψ of level D and nebentypus χ_D.
class DihedralForm {
public:
    static constexpr long long kDefaultBound = 100000;

    DihedralForm(Grossenchar c, long long bound = kDefaultBound) : ch_(std::move(c)) {
        table_ = detail::prime_table(ch_.field);
        t_g_ = boost::math::constants::pi<Real50>() * (ch_.ell < 0 ? -ch_.ell : ch_.ell) / ch_.field.eps_log;
        parity_ = ch_.kappa ? -1 : 1;
        prime_cache(bound);
    }

    const Grossenchar& character() const { return ch_; }
    const QuadField& field() const { return ch_.field; }
    long long level() const { return ch_.field.D; }
    long long ell() const { return ch_.ell; }
    int kappa() const { return ch_.kappa; }
    int parity() const { return parity_; }
    const Real50& t_g() const { return t_g_; }
    double t() const { return t_g_.convert_to<double>(); }
    long long bound() const { return static_cast<long long>(lam_.size()) - 1; }

    /// @brief λ(p^e) from the ideals above p.
    Quad prime_power(long long p, int e) const {
        const PrimeDatum& d = table_->get(p);
        int sg = (ch_.kappa == 1 && d.norm_sign < 0 && (e % 2)) ? -1 : 1;
        switch (d.type) {
        case SplitType::inert:
            return Quad(e % 2 ? 0 : 1);
        case SplitType::ramified: {
            // ψ(𝔭) = ±1 since 𝔭 = σ𝔭
            Quad th = kPiQ() * ch_.ell * d.ratio_over_eps;
            Quad v = boost::multiprecision::cos(th * e);
            return sg * (v > 0 ? Quad(1) : Quad(-1));
        }
        case SplitType::split: {
            Quad th = kPiQ() * ch_.ell * d.ratio_over_eps;
            Quad s = 0;
            for (int j = 0; j <= e; ++j) s += boost::multiprecision::cos((2 * j - e) * th);
            return sg * s;
        }
        }
        return 0;
    }

    /// @brief λ(n), multiplicative over prime powers.
    Quad hecke_eigenvalue(long long n) const {
        if (n < 1) throw std::invalid_argument("hecke_eigenvalue: n must be positive");
        if (n < static_cast<long long>(lam_.size())) return lam_[n];
        {
            std::lock_guard<std::mutex> lk(*mx_);
            auto it = extra_.find(n);
            if (it != extra_.end()) return it->second;
        }
        Quad v = 1;
        for (auto [p, e] : arith::factor(n)) v *= prime_power(p, e);
        std::lock_guard<std::mutex> lk(*mx_);
        extra_.emplace(n, v);
        return v;
    }

    double lambda(long long n) const { return static_cast<double>(hecke_eigenvalue(n)); }

    /// @brief Extends the dense table to cover 1..bound.
    void prime_cache(long long bound) {
        if (bound < static_cast<long long>(lam_.size())) return;
        std::vector<Quad> lam(bound + 1, Quad(0));
        auto spf = arith::spf_sieve(static_cast<int>(bound));
        lam[1] = 1;
        for (long long n = 2; n <= bound; ++n) {
            long long p = spf[n], m = n;
            int e = 0;
            while (m % p == 0) { m /= p; ++e; }
            lam[n] = (m == 1) ? prime_power(p, e) : lam[n / m] * lam[m];
        }
        lam_ = std::move(lam);
    }

    const std::vector<Quad>& table() const { return lam_; }

    /// @brief Coefficient table {D, ell, kappa, t_g, coeffs: [[n, λ(n)], ...]}.
    nlohmann::json to_json(long long N) const {
        nlohmann::json j;
        j["D"] = level();
        j["ell"] = ch_.ell;
        j["kappa"] = ch_.kappa;
        j["t_g"] = to_decimal(t_g_, 40);
        auto arr = nlohmann::json::array();
        for (long long n = 1; n <= N; ++n) arr.push_back({n, to_decimal(hecke_eigenvalue(n), 34)});
        j["coeffs"] = arr;
        return j;
    }

private:
    static Quad kPiQ() { return boost::math::constants::pi<Quad>(); }

    Grossenchar ch_;
    std::shared_ptr<detail::PrimeTable> table_;
    Real50 t_g_;
    int parity_ = 1;
    std::vector<Quad> lam_;
    mutable std::shared_ptr<std::mutex> mx_ = std::make_shared<std::mutex>();
    mutable std::unordered_map<long long, Quad> extra_;
};

/// @brief Validated character to form, priming the coefficient table.
inline DihedralForm build_form(const Grossenchar& c, long long bound = DihedralForm::kDefaultBound) {
    return DihedralForm(c, bound);
}

/// @brief Convenience: field, character and form in one step.
inline DihedralForm make_dihedral(long long D, long long ell, int kappa = 0,
                                  long long bound = DihedralForm::kDefaultBound) {
    return build_form(make_character(make_field(D), ell, kappa), bound);
}

} // namespace dihedral
