#pragma once

// Elementary number theory on 64-bit integers: factorization, totients,
// smallest-prime-factor sieves, prime selection for target densities and the
// prime-tail threshold g(s).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "idsc/errors.hpp"
#include "idsc/rational.hpp"

namespace idsc {

struct PrimePower {
    u64 prime;
    unsigned exponent;

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Primes strictly increasing; the product of prime^exponent is the integer.
using Factorization = std::vector<PrimePower>;

inline u64 gcd_u64(u64 a, u64 b) { return std::gcd(a, b); }
inline u64 lcm_u64(u64 a, u64 b)
{
    if (a == 0 || b == 0) return 0;
    u128 l = static_cast<u128>(a / gcd_u64(a, b)) * b;
    if (l > UINT64_MAX) throw budget_error("lcm overflows 64 bits");
    return static_cast<u64>(l);
}

namespace detail {

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod(u64 base, u64 e, u64 m)
{
    u64 r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1;
    }
    return r;
}

inline void push_factor(Factorization& f, u64 p)
{
    if (!f.empty() && f.back().prime == p)
        ++f.back().exponent;
    else
        f.push_back({p, 1});
}

inline Factorization normalized(std::vector<u64> primes)
{
    std::sort(primes.begin(), primes.end());
    Factorization f;
    for (u64 p : primes) push_factor(f, p);
    return f;
}

} // namespace detail

/// Deterministic Miller-Rabin; the fixed base set is exact for all 64-bit n.
inline bool is_prime(u64 n)
{
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = detail::powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned i = 1; i < s; ++i) {
            x = detail::mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

namespace detail {

// Brent's variant of Pollard rho; only called on odd composites.
inline u64 find_divisor(u64 n)
{
    for (u64 c = 1;; ++c) {
        u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
        u64 r = 1;
        auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
        do {
            x = y;
            for (u64 i = 0; i < r; ++i) y = f(y);
            u64 k = 0;
            do {
                ys = y;
                for (u64 i = 0; i < std::min<u64>(128, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = std::gcd(q, n);
                k += 128;
            } while (k < r && g == 1);
            r <<= 1;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = std::gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

inline void split(u64 n, std::vector<u64>& out)
{
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = find_divisor(n);
    split(d, out);
    split(n / d, out);
}

} // namespace detail

/// Exact factorization of any 64-bit n >= 1. Small factors by trial
/// division, the remaining cofactor by Pollard rho.
inline Factorization factorize(u64 n)
{
    IDSC_REQUIRE(n >= 1, "factorize: n must be >= 1");
    std::vector<u64> primes;
    for (u64 p : {2ULL, 3ULL, 5ULL}) {
        while (n % p == 0) {
            primes.push_back(p);
            n /= p;
        }
    }
    static constexpr u64 wheel[] = {4, 2, 4, 2, 4, 6, 2, 6};
    u64 p = 7;
    for (std::size_t i = 0; p <= 10000 && p * p <= n; p += wheel[i++ & 7]) {
        while (n % p == 0) {
            primes.push_back(p);
            n /= p;
        }
    }
    if (n > 1) detail::split(n, primes);
    return detail::normalized(std::move(primes));
}

inline Factorization factorize(const Natural& n) { return factorize(to_u64(n)); }

inline u64 reconstruct(const Factorization& f)
{
    u64 v = 1;
    for (auto [p, e] : f)
        for (unsigned i = 0; i < e; ++i) v *= p;
    return v;
}

inline u64 totient(const Factorization& f)
{
    u64 phi = 1;
    for (auto [p, e] : f) {
        phi *= p - 1;
        for (unsigned i = 1; i < e; ++i) phi *= p;
    }
    return phi;
}

inline u64 totient(u64 n)
{
    IDSC_REQUIRE(n >= 1, "totient: n must be >= 1");
    return totient(factorize(n));
}

inline u64 radical(const Factorization& f)
{
    u64 r = 1;
    for (auto pe : f) r *= pe.prime;
    return r;
}

/// Smallest-prime-factor table for 1..limit. Read-only after construction,
/// so one table can be shared by any number of workers.
class SpfTable {
public:
    static constexpr u64 kDefaultCap = u64{1} << 27;

    explicit SpfTable(u64 limit, u64 cap = kDefaultCap) : limit_(limit)
    {
        IDSC_REQUIRE(limit >= 1, "sieve: limit must be >= 1");
        if (limit > cap)
            throw budget_error("sieve: limit " + std::to_string(limit) + " exceeds cap " + std::to_string(cap));
        spf_.assign(limit + 1, 0);
        for (u64 i = 2; i <= limit; ++i) {
            if (spf_[i] != 0) continue;
            for (u64 j = i; j <= limit; j += i)
                if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
        }
    }

    u64 limit() const { return limit_; }

    /// 0 marks the unit 1 (it has no prime factor).
    u64 smallest_prime_factor(u64 n) const
    {
        check(n);
        return spf_[n];
    }

    bool is_prime(u64 n) const { return n >= 2 && smallest_prime_factor(n) == n; }

    Factorization factorize(u64 n) const
    {
        check(n);
        Factorization f;
        while (n > 1) {
            u64 p = spf_[n];
            detail::push_factor(f, p);
            n /= p;
        }
        return f;
    }

    u64 totient(u64 n) const { return idsc::totient(factorize(n)); }

    std::vector<u64> totients() const
    {
        std::vector<u64> phi(limit_ + 1, 0);
        for (u64 n = 1; n <= limit_; ++n) phi[n] = totient(n);
        return phi;
    }

    std::vector<u64> primes() const
    {
        std::vector<u64> out;
        for (u64 n = 2; n <= limit_; ++n)
            if (spf_[n] == n) out.push_back(n);
        return out;
    }

private:
    void check(u64 n) const
    {
        IDSC_REQUIRE(n >= 1 && n <= limit_, "sieve: " + std::to_string(n) + " outside 1.." + std::to_string(limit_));
    }

    u64 limit_;
    std::vector<std::uint32_t> spf_;
};

struct RadicalSmooth {
    u64 radical;
    u64 smooth;
    friend bool operator==(const RadicalSmooth&, const RadicalSmooth&) = default;
};

/// radical(n) and the T-smooth part of n (product of p^v_p(n) over p <= T).
inline RadicalSmooth radical_and_smooth_part(u64 n, const Rational& T)
{
    IDSC_REQUIRE(n >= 1, "radical_and_smooth_part: n must be >= 1");
    IDSC_REQUIRE(T >= 1, "radical_and_smooth_part: T must be >= 1");
    RadicalSmooth out{1, 1};
    for (auto [p, e] : factorize(n)) {
        out.radical *= p;
        if (Rational(to_natural(p)) <= T)
            for (unsigned i = 0; i < e; ++i) out.smooth *= p;
    }
    return out;
}

/// Smallest prime strictly greater than n. Uses GMP's probabilistic test
/// once n leaves the 64-bit range, where deterministic testing is not offered.
inline Natural next_prime(const Natural& n)
{
    if (n < 2) return 2;
    if (fits_u64(n) && n < Natural("18446744073709551557")) {
        u64 v = to_u64(n) + 1;
        while (!is_prime(v)) ++v;
        return to_natural(v);
    }
    Natural out;
    mpz_nextprime(out.get_mpz_t(), n.get_mpz_t());
    return out;
}

struct PrimeRun {
    std::vector<Natural> primes;
    Rational density; // prod (1 - 1/p) = phi(P)/P
};

/// Refusal carrying the partial product reached before the cap.
class prime_budget_error : public budget_error {
public:
    prime_budget_error(const std::string& what, PrimeRun partial)
        : budget_error(what), partial_(std::move(partial))
    {
    }
    const PrimeRun& partial() const { return partial_; }

private:
    PrimeRun partial_;
};

inline constexpr std::size_t kDefaultPrimeCap = 200000;

/// Shortest run of consecutive primes above Q whose density
/// prod (1 - 1/p) is strictly below eps.
inline PrimeRun primes_for_epsilon(const Natural& Q, const Rational& eps, std::size_t max_primes = kDefaultPrimeCap)
{
    IDSC_REQUIRE(eps > 0 && eps <= 1, "primes_for_epsilon: eps must lie in (0,1]");
    PrimeRun run;
    run.density = 1;
    Natural p = next_prime(Q);

    // Every factor is at least 1 - 1/p1, so an unreachable target is
    // detected before walking huge primes.
    {
        const double lower = static_cast<double>(max_primes) * std::log1p(-1.0 / p.get_d());
        if (std::isfinite(lower) && lower > std::log(eps.get_d()) + 1e-9 && p > Natural(1000000)) {
            throw prime_budget_error("primes_for_epsilon: " + std::to_string(max_primes) + " primes above " +
                                         to_string(Q) + " cannot push the density below " + to_string(eps),
                                     run);
        }
    }

    // Numerator and denominator are kept as plain products so each step is a
    // single multiplication; the exact comparison only runs once the float
    // log estimate is near the target.
    Natural num = 1, den = 1;
    double log_density = 0.0;
    const double log_eps = std::log(eps.get_d());
    auto finish = [&] { run.density = make_rational(num, den); };
    while (true) {
        if (run.primes.size() == max_primes) {
            finish();
            throw prime_budget_error("primes_for_epsilon: prime cap " + std::to_string(max_primes) +
                                         " reached above " + to_string(Q) + "; partial density ~" +
                                         std::to_string(run.density.get_d()) + " not below " + to_string(eps),
                                     run);
        }
        run.primes.push_back(p);
        num *= p - 1;
        den *= p;
        log_density += std::log1p(-1.0 / p.get_d());
        if (log_density < log_eps + 1e-6 && num < eps * den) {
            finish();
            return run;
        }
        p = next_prime(p);
    }
}

/// Least n >= 1 with sum over primes p | s, p > n of 1/p strictly below 1/2.
inline u64 g_of(u64 s)
{
    IDSC_REQUIRE(s >= 1, "g_of: s must be >= 1");
    const Factorization f = factorize(s);
    // The tail sum only drops at prime divisors, so the answer is 1 or a
    // prime divisor of s.
    Rational tail = 0;
    for (auto pe : f) tail += Rational(1, to_natural(pe.prime));
    if (tail < Rational(1, 2)) return 1;
    for (auto pe : f) {
        tail -= Rational(1, to_natural(pe.prime));
        if (tail < Rational(1, 2)) return pe.prime;
    }
    throw invariant_error("g_of: empty tail sum was not below 1/2");
}

/// #{1 <= n < x : g(n) = v}.
inline u64 g_level_count(u64 x, u64 v)
{
    IDSC_REQUIRE(x >= 1 && v >= 1, "g_level_count: x, v must be >= 1");
    u64 count = 0;
    for (u64 n = 1; n < x; ++n)
        if (g_of(n) == v) ++count;
    return count;
}

} // namespace idsc
