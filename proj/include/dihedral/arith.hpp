#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

/// @brief Elementary multiplicative number theory on 64-bit integers.
namespace dihedral::arith {

using i64 = std::int64_t;
using u64 = std::uint64_t;

inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % m);
}

inline u64 powmod(u64 b, u64 e, u64 m) {
    u64 r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

/// @brief Prime factorization as (p, e) pairs in increasing p.
inline std::vector<std::pair<i64, int>> factor(i64 n) {
    if (n < 1) throw std::invalid_argument("factor: n must be positive");
    std::vector<std::pair<i64, int>> out;
    for (i64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) { n /= p; ++e; }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

inline bool is_squarefree(i64 n) {
    for (auto [p, e] : factor(n))
        if (e > 1) return false;
    return true;
}

inline int moebius(i64 n) {
    int m = 1;
    for (auto [p, e] : factor(n)) {
        if (e > 1) return 0;
        m = -m;
    }
    return m;
}

/// @brief Number of distinct prime factors.
inline int omega(i64 n) { return static_cast<int>(factor(n).size()); }

inline i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [p, e] : factor(n)) r = r / p * (p - 1);
    return r;
}

/// @brief Index of Γ₀(n) in SL₂(Z): n·Π(1+1/p).
inline i64 nu(i64 n) {
    i64 r = n;
    for (auto [p, e] : factor(n)) r = r / p * (p + 1);
    return r;
}

inline std::vector<i64> divisors(i64 n) {
    std::vector<i64> d{1};
    for (auto [p, e] : factor(n)) {
        std::size_t sz = d.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < sz; ++i) d.push_back(d[i] * pk);
        }
    }
    std::sort(d.begin(), d.end());
    return d;
}

inline i64 num_divisors(i64 n) {
    i64 r = 1;
    for (auto [p, e] : factor(n)) r *= e + 1;
    return r;
}

/// @brief Extended gcd: returns g and sets x, y with ax + by = g.
inline i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
    if (b == 0) { x = (a >= 0) ? 1 : -1; y = 0; return a >= 0 ? a : -a; }
    i64 x1, y1;
    i64 g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

inline i64 inv_mod(i64 a, i64 m) {
    i64 x, y;
    if (ext_gcd(mod(a, m), m, x, y) != 1) throw std::domain_error("inv_mod: not invertible");
    return mod(x, m);
}

/// @brief Jacobi symbol (a/n) for odd positive n.
inline int jacobi(i64 a, i64 n) {
    if (n <= 0 || n % 2 == 0) throw std::invalid_argument("jacobi: n must be odd positive");
    a = mod(a, n);
    int r = 1;
    while (a) {
        while (a % 2 == 0) {
            a /= 2;
            i64 m8 = n % 8;
            if (m8 == 3 || m8 == 5) r = -r;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) r = -r;
        a %= n;
    }
    return n == 1 ? r : 0;
}

/// @brief Kronecker symbol (D/n) for a discriminant D ≡ 0,1 mod 4 and any integer n.
inline int kronecker(i64 D, i64 n) {
    if (n == 0) return (D == 1 || D == -1) ? 1 : 0;
    int r = 1;
    if (n < 0) {
        n = -n;
        if (D < 0) r = -r;
    }
    while (n % 2 == 0) {
        n /= 2;
        if (D % 2 == 0) return 0;
        i64 m8 = mod(D, 8);
        if (m8 == 3 || m8 == 5) r = -r;
    }
    if (n == 1) return r;
    return r * jacobi(D, n);
}

/// @brief Square root of a modulo an odd prime p (Tonelli-Shanks); requires (a/p) = 1.
inline i64 sqrt_mod_prime(i64 a, i64 p) {
    a = mod(a, p);
    if (a == 0) return 0;
    if (p == 2) return a;
    if (powmod(a, (p - 1) / 2, p) != 1) throw std::domain_error("sqrt_mod_prime: non-residue");
    u64 q = p - 1;
    int s = 0;
    while (q % 2 == 0) { q /= 2; ++s; }
    u64 z = 2;
    while (powmod(z, (p - 1) / 2, p) != static_cast<u64>(p - 1)) ++z;
    u64 m = s, c = powmod(z, q, p), t = powmod(a, q, p), r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        u64 i = 0, tt = t;
        while (tt != 1) { tt = mulmod(tt, tt, p); ++i; }
        u64 b = c;
        for (u64 j = 0; j + 1 < m - i; ++j) b = mulmod(b, b, p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return static_cast<i64>(r);
}

/// @brief Smallest-prime-factor sieve up to n.
inline std::vector<int> spf_sieve(int n) {
    std::vector<int> spf(n + 1, 0);
    for (int i = 2; i <= n; ++i) {
        if (spf[i]) continue;
        for (long long j = i; j <= n; j += i)
            if (!spf[j]) spf[j] = i;
    }
    return spf;
}

} // namespace dihedral::arith
