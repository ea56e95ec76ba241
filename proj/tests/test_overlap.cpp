#include <gtest/gtest.h>

#include <random>

#include "idsc/overlap.hpp"

using namespace idsc;

namespace {

Rational R(long n, long d = 1) { return make_rational(n, d); }

u64 phi(u64 n) { return totient(n); }

// Maximum of exact / (addend1 + addend2) over 1 <= r < q <= Q.
Rational max_bound_ratio(u64 Q, const ApproxFunction& psi, const TargetSequence& y)
{
    Rational best = 0;
    for (u64 q = 1; q <= Q; ++q)
        for (u64 r = 1; r < q; ++r) {
            auto rep = overlap_report(q, r, psi(q), psi(r), y(q)[0], y(r)[0]);
            best = rmax(best, rep.exact_overlap / rep.bound.total());
        }
    return best;
}

} // namespace

TEST(DecomposePair, Examples)
{
    auto a = decompose_pair(12, 18);
    EXPECT_EQ(a.ell, 1u);
    EXPECT_EQ(a.em, 6u);
    EXPECT_EQ(a.en, 36u);
    auto b = decompose_pair(6, 10);
    EXPECT_EQ(b.ell, 2u);
    EXPECT_EQ(b.em, 1u);
    EXPECT_EQ(b.en, 15u);
    auto c = decompose_pair(360, 360);
    EXPECT_EQ(c.ell, 360u);
    EXPECT_EQ(c.em, 1u);
    EXPECT_EQ(c.en, 1u);
    EXPECT_THROW(decompose_pair(0, 3), usage_error);
}

TEST(DecomposePair, IdentitiesOnSampledPairs)
{
    // Construction asserts every identity; sample pairs up to 10^4.
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20000; ++i) {
        const u64 q = 1 + rng() % 10000, r = 1 + rng() % 10000;
        auto d = decompose_pair(q, r);
        ASSERT_EQ(d.gcd, std::gcd(q, r));
        ASSERT_EQ(phi(d.em) * phi(d.ell), phi(d.gcd));
    }
    for (u64 q = 1; q <= 120; ++q)
        for (u64 r = 1; r <= 120; ++r) ASSERT_NO_THROW(decompose_pair(q, r));
}

TEST(CoprimePairCount, Examples)
{
    EXPECT_EQ(coprime_pair_count_formula(decompose_pair(3, 2), 1), 1u);
    EXPECT_EQ(coprime_pair_count_formula(decompose_pair(6, 10), 3), 0u);
    EXPECT_EQ(coprime_pair_count_formula(decompose_pair(6, 10), 4), 1u);
    EXPECT_EQ(coprime_pair_count_oracle(6, 10, 4), 1u);

    auto t = coprime_pair_count_table(3, 2);
    EXPECT_EQ(t, (std::vector<u64>{0, 1, 0, 0, 0, 1}));
    u64 mass = 0;
    for (u64 v : coprime_pair_count_table(6, 10)) mass += v;
    EXPECT_EQ(mass, 8u);
    EXPECT_EQ(coprime_pair_count_oracle(12, 12, 0), phi(12));
    EXPECT_EQ(coprime_pair_count_oracle(3, 2, -5), 1u); // -5 = 1 mod 6
}

TEST(CoprimePairCount, FormulaMatchesBruteForce)
{
    for (u64 q = 1; q <= 60; ++q)
        for (u64 r = 1; r <= 60; ++r) {
            const auto d = decompose_pair(q, r);
            const auto table = coprime_pair_count_table(q, r);
            u64 mass = 0;
            for (std::size_t c = 0; c < table.size(); ++c) {
                ASSERT_EQ(coprime_pair_count_formula(d, static_cast<i64>(c)), table[c]) << q << " " << r << " " << c;
                mass += table[c];
            }
            ASSERT_EQ(mass, phi(q) * phi(r));
        }
}

TEST(OverlapGeometry, Examples)
{
    auto g1 = overlap_geometry(decompose_pair(6, 10), R(1, 3), R(1, 5), 0, 0);
    EXPECT_EQ(g1.D, R(10, 3));
    auto g2 = overlap_geometry(decompose_pair(2, 3), R(1, 4), R(1, 4), 0, 0);
    EXPECT_EQ(g2.delta, R(1, 6));
    EXPECT_EQ(g2.Delta, R(1, 4));
    EXPECT_EQ(g2.D, R(3, 2));
    EXPECT_EQ(g2.X, R(-3, 4));
    EXPECT_EQ(g2.Y, R(3, 4));
    EXPECT_FALSE(g2.degenerate);
    auto g3 = overlap_geometry(decompose_pair(4, 6), 0, 0, R(1, 3), 0);
    EXPECT_TRUE(g3.degenerate);
    EXPECT_EQ(g3.D, 0);
    // Shifted window centred at (r/g) y_q - (q/g) y_r.
    auto g4 = overlap_geometry(decompose_pair(2, 3), R(1, 4), R(1, 4), R(1, 2), R(1, 3));
    EXPECT_EQ((g4.X + g4.Y) / 2, 3 * R(1, 2) - 2 * R(1, 3));
    EXPECT_EQ(g4.t, 2u); // max(g(2), g(3)) = max(2, 1)
    EXPECT_THROW(overlap_geometry(decompose_pair(2, 3), R(-1, 4), 0, 0, 0), usage_error);
}

TEST(OverlapGeometry, FactorFourIdentityAndT)
{
    // Holds by construction (asserted); exercised across many pairs here.
    for (u64 q = 1; q <= 50; ++q)
        for (u64 r = 1; r <= 50; ++r) {
            auto d = decompose_pair(q, r);
            auto g = overlap_geometry(d, R(1, 3), R(2, 7), R(1, 5), R(-1, 2));
            ASSERT_EQ(Rational(to_natural(d.em * d.ell)) * g.D * g.delta, 4 * R(1, 3) * R(2, 7));
            ASSERT_EQ(g.t, std::max(g_of(q / d.gcd), g_of(r / d.gcd)));
        }
}

TEST(PairOverlap, Examples)
{
    EXPECT_EQ(pair_overlap_exact(2, 3, R(1, 4), R(1, 4), 0, 0), R(1, 12));
    EXPECT_EQ(pair_overlap_exact(2, 4, R(1, 8), R(1, 8), 0, 0), 0);
    EXPECT_EQ(pair_overlap_exact(5, 7, 0, R(1, 3), 0, 0), 0);
    // Self pair is the set measure.
    EXPECT_EQ(pair_overlap_exact(9, 9, R(1, 3), R(1, 3), R(1, 7), R(1, 7)), measure_Aq(9, R(1, 3), R(1, 7)));
}

TEST(OverlapBound, Examples)
{
    auto d23 = decompose_pair(2, 3);
    auto g23 = overlap_geometry(d23, R(1, 4), R(1, 4), 0, 0);
    auto b23 = overlap_bound_rhs(d23, R(1, 4), R(1, 4), g23);
    EXPECT_EQ(b23.error, R(1, 12));
    EXPECT_GE(b23.total(), pair_overlap_exact(2, 3, R(1, 4), R(1, 4), 0, 0));

    auto d = decompose_pair(6, 10);
    auto g = overlap_geometry(d, R(1, 3), R(1, 5), 0, 0);
    EXPECT_EQ(prime_boost(d, g.D), R(6, 5));
    EXPECT_EQ(M_term(d, R(1, 3), R(1, 5), g), R(4, 375));
    EXPECT_EQ(overlap_bound_rhs(d, R(1, 3), R(1, 5), g).main, R(4, 375));

    // D <= 1 switches the main term off.
    auto d2 = decompose_pair(7, 5);
    auto small = overlap_geometry(d2, R(1, 100), R(1, 100), 0, 0);
    EXPECT_LE(small.D, 1);
    EXPECT_EQ(overlap_bound_rhs(d2, R(1, 100), R(1, 100), small).main, 0);

    auto gh = overlap_geometry(d23, R(1, 2), R(1, 2), 0, 0);
    EXPECT_EQ(gh.D, 3);
    EXPECT_EQ(M_term(d23, R(1, 2), R(1, 2), gh), R(1, 12));
}

TEST(OverlapBound, IndicatorConventionsDifferOnlyAtDEqualsOne)
{
    // q = 2, r = 1, psi = (1/2, 1/4): D = 2 * 2 * (1/4) = 1.
    auto d = decompose_pair(2, 1);
    auto g = overlap_geometry(d, R(1, 2), R(1, 4), 0, 0);
    ASSERT_EQ(g.D, 1);
    EXPECT_EQ(M_term(d, R(1, 2), R(1, 4), g, Indicator::strict), 0);
    EXPECT_GT(M_term(d, R(1, 2), R(1, 4), g, Indicator::inclusive), 0);
    EXPECT_TRUE(indicator_holds(R(3, 2), Indicator::strict));
    EXPECT_FALSE(indicator_holds(R(1, 2), Indicator::inclusive));
}

TEST(TrivialBound, Examples)
{
    EXPECT_EQ(trivial_overlap_bound(3, 2, R(1, 4), R(1, 4)), R(7, 48));
    EXPECT_EQ(trivial_overlap_bound(3, 2, 0, R(1, 4)), 0);
    EXPECT_EQ(trivial_overlap_bound(4, 2, R(1, 4), R(1, 4)), R(1, 8));
    EXPECT_THROW(trivial_overlap_bound(2, 3, R(1, 4), R(1, 4)), usage_error);
    EXPECT_THROW(trivial_overlap_bound(2, 2, R(1, 4), R(1, 4)), usage_error);
}

TEST(OverlapReport, OrdersTrivialBoundAndSkipsSelfPair)
{
    auto a = overlap_report(2, 3, R(1, 4), R(1, 4), 0, 0);
    EXPECT_EQ(a.exact_overlap, R(1, 12));
    ASSERT_TRUE(a.trivial_rhs);
    EXPECT_EQ(*a.trivial_rhs, R(7, 48));
    EXPECT_FALSE(overlap_report(5, 5, R(1, 4), R(1, 4), 0, 0).trivial_rhs);
}

TEST(OverlapBound, EmpiricalConstantsMatchOracle)
{
    // Maxima over 1 <= r < q <= 40 from an independent interval-merging
    // oracle (integer-scaled endpoints), frozen here.
    EXPECT_EQ(max_bound_ratio(40, ApproxFunction::parse("const:1/4"), TargetSequence::zero(1)), R(4));
    EXPECT_EQ(max_bound_ratio(40, ApproxFunction::parse("const:1/4"), TargetSequence::parse("rnd:12345,256", 1)),
              R(2229, 584));
    EXPECT_EQ(max_bound_ratio(40, ApproxFunction::parse("pow:1/2,1"), TargetSequence::zero(1)), R(72, 19));
}

TEST(OverlapBound, TrivialBoundHoldsWithSmallConstant)
{
    for (u64 q = 2; q <= 60; ++q)
        for (u64 r = 1; r < q; ++r) {
            auto rep = overlap_report(q, r, R(1, 4), R(1, 4), R(1, 3), R(2, 5));
            ASSERT_LE(rep.exact_overlap, 4 * *rep.trivial_rhs) << q << " " << r;
        }
}

TEST(WindowCount, CoveringWindowDominatesOverlap)
{
    std::mt19937_64 rng(5);
    const std::vector<Rational> psis{R(1, 4), R(1, 2), R(1, 7), R(2, 5)};
    for (u64 q = 1; q <= 40; ++q)
        for (u64 r = 1; r <= 40; ++r) {
            if (q == r) continue;
            const Rational& pq = psis[rng() % psis.size()];
            const Rational& pr = psis[rng() % psis.size()];
            const Rational yq = R(static_cast<long>(rng() % 13), 13), yr = R(static_cast<long>(rng() % 11), 11);
            auto d = decompose_pair(q, r);
            auto g = overlap_geometry(d, pq, pr, yq, yr);
            auto [lo, hi] = covering_window(g);
            const Rational bound = g.delta * Rational(window_pair_count(d, lo, hi));
            ASSERT_GE(bound, pair_overlap_exact(q, r, pq, pr, yq, yr)) << q << " " << r;
        }
}

TEST(WindowCount, HalfWidthWindowCanMissTouchingPairs)
{
    // q = 2, r = 3, psi = 1/4: [X, Y] = [-3/4, 3/4] holds only c = 0, where
    // f vanishes, yet the sets overlap in measure 1/12.
    auto d = decompose_pair(2, 3);
    auto g = overlap_geometry(d, R(1, 4), R(1, 4), 0, 0);
    EXPECT_EQ(window_pair_count(d, g.X, g.Y), 0);
    auto [lo, hi] = covering_window(g);
    EXPECT_EQ(window_pair_count(d, lo, hi), 2);
}

TEST(SiftedCount, Examples)
{
    auto a = sifted_interval_count(0, 10, 6);
    EXPECT_EQ(a.count, 3);
    EXPECT_EQ(a.main_term, R(10, 3));
    EXPECT_EQ(a.error, R(1, 3));
    EXPECT_EQ(a.omega, 2u);

    auto b = sifted_interval_count(R(-7, 2), R(17, 3), 1);
    EXPECT_EQ(b.count, 5 - (-3) + 1);
    EXPECT_LE(b.error, 1);

    // [0, 30) as the integers 0..29.
    EXPECT_EQ(sifted_interval_count(0, 29, 30).count, 8);
    EXPECT_THROW(sifted_interval_count(1, 0, 6), usage_error);
    EXPECT_THROW(sifted_interval_count(0, 10, 2 * 3 * 5 * 7, 3), budget_error);
}

TEST(SiftedCount, MatchesEnumerationAndErrorBound)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 3000; ++i) {
        const long xn = static_cast<long>(rng() % 4000) - 2000, len = static_cast<long>(rng() % 3000);
        const Rational X = R(xn, 1 + static_cast<long>(rng() % 7)), Y = X + R(len, 1 + static_cast<long>(rng() % 5));
        const u64 n = 1 + rng() % 100000;
        auto s = sifted_interval_count(X, Y, n);
        long brute = 0;
        for (Natural c = ceil_of(X); Rational(c) <= Y; ++c)
            if (std::gcd(static_cast<u64>(std::abs(c.get_si())), n) == 1) ++brute;
        ASSERT_EQ(s.count, brute);
        ASSERT_LE(s.error, Rational(Natural(1) << s.omega));
    }
}
