#include <gtest/gtest.h>

#include <numeric>

#include "idsc/arith.hpp"

using namespace idsc;

namespace {

// Independent oracles: plain trial division and gcd counting.
Factorization trial_division(u64 n)
{
    Factorization f;
    for (u64 p = 2; p * p <= n; ++p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) f.push_back({p, e});
    }
    if (n > 1) f.push_back({n, 1});
    return f;
}

u64 totient_by_count(u64 n)
{
    u64 c = 0;
    for (u64 a = 1; a <= n; ++a)
        if (std::gcd(a, n) == 1) ++c;
    return c;
}

Rational prime_tail(u64 s, u64 n)
{
    Rational t = 0;
    for (auto pe : trial_division(s))
        if (pe.prime > n) t += Rational(1, to_natural(pe.prime));
    return t;
}

u64 g_brute(u64 s)
{
    u64 n = 1;
    while (prime_tail(s, n) >= Rational(1, 2)) ++n;
    return n;
}

} // namespace

TEST(Factorize, Examples)
{
    EXPECT_TRUE(factorize(1).empty());
    EXPECT_EQ(factorize(12), (Factorization{{2, 2}, {3, 1}}));
    EXPECT_EQ(factorize(2310), (Factorization{{2, 1}, {3, 1}, {5, 1}, {7, 1}, {11, 1}}));
    EXPECT_THROW(factorize(u64{0}), usage_error);
}

TEST(Factorize, LargeSemiprimeAndPrime)
{
    const u64 p = 4294967291ULL, q = 4294967279ULL; // largest primes below 2^32
    EXPECT_EQ(factorize(p * q), (Factorization{{q, 1}, {p, 1}}));
    EXPECT_EQ(factorize(18446744073709551557ULL), (Factorization{{18446744073709551557ULL, 1}}));
    EXPECT_EQ(factorize(u64{1} << 63), (Factorization{{2, 63}}));
}

TEST(Factorize, AgreesWithTrialDivisionAndReconstructs)
{
    for (u64 n = 1; n <= 10000; ++n) {
        const auto f = factorize(n);
        ASSERT_EQ(f, trial_division(n)) << n;
        ASSERT_EQ(reconstruct(f), n);
    }
}

TEST(Totient, Examples)
{
    EXPECT_EQ(totient(1), 1u);
    EXPECT_EQ(totient(12), 4u);
    EXPECT_EQ(totient(97), 96u);
    EXPECT_THROW(totient(0), usage_error);
}

TEST(Totient, MatchesCoprimeCount)
{
    for (u64 n = 1; n <= 10000; ++n) ASSERT_EQ(totient(n), totient_by_count(n)) << n;
}

TEST(SpfTable, Examples)
{
    SpfTable t(10);
    EXPECT_EQ(t.smallest_prime_factor(9), 3u);
    EXPECT_EQ(t.smallest_prime_factor(7), 7u);
    EXPECT_EQ(t.smallest_prime_factor(1), 0u);
    EXPECT_THROW(t.smallest_prime_factor(11), usage_error);
    EXPECT_THROW(SpfTable(1000, 100), budget_error);
}

TEST(SpfTable, FactorizationAgrees)
{
    SpfTable t(20000);
    for (u64 n = 1; n <= 20000; ++n) ASSERT_EQ(t.factorize(n), factorize(n));
    const auto phi = t.totients();
    for (u64 n = 1; n <= 20000; n += 37) ASSERT_EQ(phi[n], totient(n));
}

TEST(IsPrime, AgreesWithSieve)
{
    SpfTable t(100000);
    for (u64 n = 1; n <= 100000; ++n) ASSERT_EQ(is_prime(n), t.is_prime(n)) << n;
    EXPECT_FALSE(is_prime(3215031751ULL)); // strong pseudoprime to bases 2,3,5,7
}

TEST(RadicalSmooth, Examples)
{
    EXPECT_EQ(radical_and_smooth_part(12, 2), (RadicalSmooth{6, 4}));
    EXPECT_EQ(radical_and_smooth_part(1, 7), (RadicalSmooth{1, 1}));
    EXPECT_EQ(radical_and_smooth_part(30, 10), (RadicalSmooth{30, 30}));
    EXPECT_EQ(radical_and_smooth_part(360, Rational(5, 2)), (RadicalSmooth{30, 8}));
}

TEST(PrimesForEpsilon, Examples)
{
    auto a = primes_for_epsilon(1, Rational(1, 2));
    EXPECT_EQ(a.primes, (std::vector<Natural>{2, 3}));
    EXPECT_EQ(a.density, Rational(1, 3));

    auto b = primes_for_epsilon(2, Rational(7, 10));
    EXPECT_EQ(b.primes, (std::vector<Natural>{3}));
    EXPECT_EQ(b.density, Rational(2, 3));

    auto c = primes_for_epsilon(1, Rational(1));
    EXPECT_EQ(c.primes, (std::vector<Natural>{2}));
    EXPECT_EQ(c.density, Rational(1, 2));

    EXPECT_THROW(primes_for_epsilon(1, Rational(0)), usage_error);
}

TEST(PrimesForEpsilon, ShortestRun)
{
    // Kept to (Q, eps) pairs whose run stays well inside the prime cap.
    const std::vector<std::pair<int, Rational>> cases{
        {1, Rational(1, 2)}, {1, Rational(1, 5)}, {1, Rational(1, 8)}, {6, Rational(1, 2)},
        {6, Rational(1, 3)}, {30, Rational(1, 2)}, {30, Rational(3, 10)}, {100, Rational(1, 2)}};
    for (const auto& [Q, eps] : cases) {
        {
            auto run = primes_for_epsilon(Q, eps);
            ASSERT_LT(run.density, eps);
            ASSERT_GT(run.primes.front(), Q);
            Rational prefix = run.density / Rational(run.primes.back() - 1, run.primes.back());
            ASSERT_GE(prefix, eps);
            for (std::size_t i = 1; i < run.primes.size(); ++i) ASSERT_EQ(run.primes[i], next_prime(run.primes[i - 1]));
        }
    }
}

TEST(PrimesForEpsilon, CapRefusalReportsPartialProduct)
{
    try {
        primes_for_epsilon(1, Rational(1, 100), 5);
        FAIL() << "expected refusal";
    } catch (const prime_budget_error& e) {
        EXPECT_EQ(e.partial().primes.size(), 5u);
        EXPECT_EQ(e.partial().density, Rational(16, 77)); // (1/2)(2/3)(4/5)(6/7)(10/11)
    }
    // Far above 2^64 an unreachable target is refused without walking primes.
    EXPECT_THROW(primes_for_epsilon(Natural(1) << 200, Rational(1, 2), 1000), prime_budget_error);
}

TEST(GOf, Examples)
{
    EXPECT_EQ(g_of(1), 1u);
    EXPECT_EQ(g_of(2), 2u);
    EXPECT_EQ(g_of(15), 3u);
    EXPECT_EQ(g_of(3), 1u); // 1/3 < 1/2 already at n = 1
    EXPECT_EQ(g_of(30), 3u);
}

TEST(GOf, MatchesBruteForceAndDependsOnlyOnRadical)
{
    for (u64 s = 1; s <= 10000; ++s) {
        const u64 g = g_of(s);
        ASSERT_EQ(g, g_of(radical(factorize(s)))) << s;
        ASSERT_LT(prime_tail(s, g), Rational(1, 2));
        if (g > 1) {
            ASSERT_GE(prime_tail(s, g - 1), Rational(1, 2));
        }
        if (s <= 2000) {
            ASSERT_EQ(g, g_brute(s));
        }
    }
}

TEST(GLevelCount, Examples)
{
    // g = 1 on 1,3,5,7,9 and g = 2 on 2,4,6,8 (brute force with the definition).
    EXPECT_EQ(g_level_count(10, 1), 5u);
    EXPECT_EQ(g_level_count(10, 2), 4u);
    EXPECT_EQ(g_level_count(2, 5), 0u);
    u64 total = 0;
    for (u64 v = 1; v <= 1000; ++v) total += g_level_count(200, v);
    EXPECT_EQ(total, 199u);
}

TEST(ParseRational, Strict)
{
    EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
    EXPECT_EQ(parse_rational("-2/4"), Rational(-1, 2));
    EXPECT_EQ(parse_rational("7"), Rational(7));
    EXPECT_EQ(to_string(parse_rational("10/4")), "5/2");
    EXPECT_THROW(parse_rational("0.5"), usage_error);
    EXPECT_THROW(parse_rational("1/0"), usage_error);
    EXPECT_THROW(parse_rational("1/-2"), usage_error);
    EXPECT_THROW(parse_rational(""), usage_error);
}
