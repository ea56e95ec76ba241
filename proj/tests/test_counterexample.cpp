#include <gtest/gtest.h>

#include <set>

#include "idsc/counterexample.hpp"

using namespace idsc;

namespace {

Rational R(long n, long d = 1) { return make_rational(n, d); }

CounterexampleInstance six() { return build_counterexample(BlockSchedule{{R(1, 2)}, PrimeGapMode::paper}); }

std::vector<Natural> N(std::initializer_list<long> xs)
{
    std::vector<Natural> out;
    for (long x : xs) out.emplace_back(x);
    return out;
}

} // namespace

TEST(BuildCounterexample, SingleBlockHalf)
{
    auto inst = six();
    ASSERT_EQ(inst.size(), 1u);
    const Block& b = inst.block(0);
    EXPECT_EQ(b.primes, N({2, 3}));
    EXPECT_EQ(b.P, 6);
    EXPECT_EQ(inst.block_members(0), N({2, 3, 6}));
    EXPECT_EQ(inst.psi(2), R(1, 6));
    EXPECT_EQ(inst.psi(3), R(1, 4));
    EXPECT_EQ(inst.psi(6), R(1, 2));
    EXPECT_EQ(inst.target(2), R(2, 3));
    EXPECT_EQ(inst.target(3), R(3, 2));
    EXPECT_EQ(inst.target(6), 0);
    EXPECT_EQ(inst.psi(5), 0);
    EXPECT_EQ(inst.target(5), 0);
    EXPECT_EQ(inst.psi(1), 0);
}

TEST(BuildCounterexample, SinglePrime)
{
    auto inst = build_counterexample(BlockSchedule{{R(1)}, PrimeGapMode::paper});
    EXPECT_EQ(inst.block(0).P, 2);
    EXPECT_EQ(inst.block_members(0), N({2}));
    EXPECT_EQ(inst.psi(2), R(1, 2));
    EXPECT_EQ(inst.target(2), 0);
}

TEST(BuildCounterexample, DeskModeStartsAboveLargestPrime)
{
    auto inst = build_counterexample(BlockSchedule{{R(1, 2), R(1, 2)}, PrimeGapMode::desk});
    EXPECT_EQ(inst.block(1).primes.front(), 5);
    EXPECT_EQ(inst.block(1).primes, N({5, 7, 11, 13, 17, 19, 23}));
    EXPECT_LT(inst.block(1).density, R(1, 2));
}

TEST(BuildCounterexample, PaperModeStartsAbovePreviousProduct)
{
    auto inst = build_counterexample(BlockSchedule::halving(2));
    EXPECT_EQ(inst.block(0).P, 6);
    EXPECT_GT(inst.block(1).primes.front(), 6);
    EXPECT_EQ(inst.block(1).primes.front(), 7);
    EXPECT_LT(inst.block(1).density, R(1, 4));
    // Divergence sum needs no divisor enumeration for the large block.
    auto s = divergence_partial_sum(inst, 2);
    EXPECT_TRUE(s.ok);
    EXPECT_EQ(s.direct, R(5, 12) + make_rational(inst.block(1).P - 1, 2 * inst.block(1).P));
}

TEST(BuildCounterexample, BudgetRefusalNamesBlock)
{
    BlockSchedule s{{R(1, 2), R(1, 1000)}, PrimeGapMode::paper, 50};
    try {
        build_counterexample(s);
        FAIL() << "expected refusal";
    } catch (const budget_error& e) {
        EXPECT_NE(std::string(e.what()).find("block 2"), std::string::npos) << e.what();
    }
}

TEST(BuildCounterexample, InvariantsRejectBadInstances)
{
    EXPECT_THROW(counterexample_from_primes({{2, 3}, {3, 5}}, {R(1, 2), R(1)}), usage_error); // shared prime
    EXPECT_THROW(counterexample_from_primes({{2, 4}}, {R(1, 2)}), usage_error);               // not prime
    EXPECT_THROW(counterexample_from_primes({{5}}, {R(1, 2)}), usage_error);                  // 4/5 not below 1/2
    Block b = make_block(N({2, 3}), R(1, 2));
    b.residue_overrides[Natural(2)] = 3; // 3 is not reduced mod 3
    EXPECT_THROW(CounterexampleInstance({b}, BlockSchedule{{R(1, 2)}}), usage_error);
}

TEST(BlockUnion, Examples)
{
    auto inst = six();
    auto u = block_union_set(inst, 0);
    EXPECT_EQ(u, build_Aq(6, R(1, 2), 0));
    EXPECT_EQ(u.intervals(), (std::vector<Interval>{{R(1, 12), R(1, 4)}, {R(3, 4), R(11, 12)}}));
    EXPECT_EQ(u.measure(), R(1, 3));

    auto one = build_counterexample(BlockSchedule{{R(1)}});
    EXPECT_EQ(block_union_set(one, 0).intervals(), (std::vector<Interval>{{R(1, 4), R(3, 4)}}));
    EXPECT_THROW(block_union_set(inst, 1), usage_error);
}

TEST(BlockUnion, PieceBudgetRefusal)
{
    auto inst = counterexample_from_primes({{2, 3, 5, 7, 11}}, {R(1, 2)});
    CounterexampleBudget tight;
    tight.max_pieces = 100; // phi(2310) = 480
    try {
        block_union_set(inst, 0, tight);
        FAIL() << "expected refusal";
    } catch (const budget_error& e) {
        EXPECT_NE(std::string(e.what()).find("480"), std::string::npos) << e.what();
    }
}

TEST(Containment, Fixtures)
{
    EXPECT_TRUE(verify_containment(six(), 0));
    for (auto primes : std::vector<std::vector<u64>>{{2, 3, 5}, {2, 3, 5, 7}, {2, 3, 5, 7, 11}}) {
        auto inst = counterexample_from_primes({primes}, {R(1, 2)});
        EXPECT_TRUE(verify_containment(inst, 0));
    }
}

TEST(Containment, CorruptedTargetLeavesThickening)
{
    // y_2 = 1/2 puts the centre of A_2 at 3/4, which is not in Q'_6.
    auto inst = six();
    TorusIntervalSet u = build_Aq(2, inst.psi(2), R(1, 2));
    for (long q : {3, 6}) u = set_union(u, build_Aq(static_cast<u64>(q), inst.psi(q), inst.target(q)));
    EXPECT_FALSE(is_subset(u, thickened_reduced_fractions(inst, 0)));
}

TEST(Containment, NonDefaultResidueChoices)
{
    Block b = make_block(N({2, 3, 5}), R(1, 2));
    b.residue_overrides[Natural(2)] = 7;  // 7 reduced mod 15
    b.residue_overrides[Natural(6)] = 4;  // mod 5
    b.residue_overrides[Natural(5)] = 5;  // mod 6
    CounterexampleInstance inst({b}, BlockSchedule{{R(1, 2)}});
    EXPECT_EQ(inst.residue_choice(2), 7);
    EXPECT_EQ(inst.target(2), R(7 * 4, 30));
    EXPECT_TRUE(verify_containment(inst, 0));
    EXPECT_EQ(verify_block_measure(inst, 0).measure, R(4, 15));
}

TEST(BlockMeasure, Examples)
{
    auto a = verify_block_measure(six(), 0);
    EXPECT_EQ(a.measure, R(1, 3));
    EXPECT_EQ(a.bound, R(1, 3));
    EXPECT_TRUE(a.ok);

    auto b = verify_block_measure(build_counterexample(BlockSchedule{{R(1)}}), 0);
    EXPECT_EQ(b.measure, R(1, 2));
    EXPECT_EQ(b.bound, R(1, 2));
    EXPECT_TRUE(b.ok);

    const std::vector<std::pair<std::vector<u64>, Rational>> fixtures{
        {{2, 3, 5}, R(4, 15)}, {{2, 3, 5, 7}, R(8, 35)}, {{2, 3, 5, 7, 11}, R(16, 77)}};
    for (const auto& [primes, want] : fixtures) {
        auto c = verify_block_measure(counterexample_from_primes({primes}, {R(1, 2)}), 0);
        EXPECT_EQ(c.measure, want);
        EXPECT_EQ(c.bound, want);
        EXPECT_TRUE(c.ok);
    }
}

TEST(DivergenceSum, Examples)
{
    auto a = divergence_partial_sum(six(), 1);
    EXPECT_EQ(a.direct, R(5, 12));
    EXPECT_TRUE(a.ok);
    auto b = divergence_partial_sum(build_counterexample(BlockSchedule{{R(1)}}), 1);
    EXPECT_EQ(b.direct, R(1, 4));
    auto c = divergence_partial_sum(six(), 0);
    EXPECT_EQ(c.direct, 0);
    EXPECT_EQ(c.closed_form, 0);
    EXPECT_THROW(divergence_partial_sum(six(), 2), usage_error);
}

TEST(DivergenceSum, DeskScheduleAllPrefixes)
{
    auto inst = build_counterexample(BlockSchedule{{R(1, 2), R(1, 2), R(1, 2)}, PrimeGapMode::desk});
    Rational closed = 0;
    for (std::size_t j = 0; j <= inst.size(); ++j) {
        auto s = divergence_partial_sum(inst, j);
        ASSERT_TRUE(s.ok) << j;
        ASSERT_EQ(s.closed_form, closed);
        if (j < inst.size()) closed += make_rational(inst.block(j).P - 1, 2 * inst.block(j).P);
    }
}

TEST(Counterexample, BlocksDisjointAndRadiiMatchThickening)
{
    auto inst = build_counterexample(BlockSchedule{{R(1, 2), R(1, 2)}, PrimeGapMode::desk});
    std::set<Natural> seen;
    for (std::size_t j = 0; j < inst.size(); ++j) {
        const auto members = inst.block_members(j);
        for (const auto& q : members) {
            ASSERT_TRUE(seen.insert(q).second);
            ASSERT_EQ(inst.block_of(q), j);
            ASSERT_EQ(inst.psi(q) / Rational(q), make_rational(Natural(1), 2 * inst.block(j).P));
        }
    }
    // Containment and measure hold for the enumerable blocks.
    for (std::size_t j = 0; j < inst.size(); ++j) {
        CounterexampleBudget budget;
        Natural phi = 1;
        for (const auto& p : inst.block(j).primes) phi *= p - 1;
        if (phi > 200000) continue;
        EXPECT_TRUE(verify_containment(inst, j, budget));
        EXPECT_TRUE(verify_block_measure(inst, j, budget).ok);
    }
}

TEST(CounterexampleAdapters, PsiAndTargetSequences)
{
    auto inst = six();
    auto psi = inst.psi_function("cx:1/2");
    auto y = inst.target_sequence(2, "cx:1/2");
    EXPECT_EQ(psi(3), R(1, 4));
    EXPECT_EQ(psi(4), 0);
    EXPECT_EQ(y(2), (std::vector<Rational>{R(2, 3), R(2, 3)}));
    EXPECT_EQ(psi.spec(), "cx:1/2");
}

TEST(CounterexampleJson, RoundTrip)
{
    Block b = make_block(N({2, 3, 5}), R(1, 2));
    b.residue_overrides[Natural(3)] = 7;
    CounterexampleInstance inst({b}, BlockSchedule{{R(1, 2)}, PrimeGapMode::desk});
    auto j = to_json(inst);
    EXPECT_EQ(j["format"], "idsc-counterexample/1");
    EXPECT_EQ(j["blocks"][0]["P"], "30");
    EXPECT_EQ(j["blocks"][0]["psi"]["15"], "1/4");
    EXPECT_EQ(j["blocks"][0]["y"]["3"], "21/10");
    auto back = counterexample_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());
    EXPECT_TRUE(verify_containment(back, 0));

    auto tampered = j;
    tampered["blocks"][0]["psi"]["15"] = "1/3";
    EXPECT_THROW(counterexample_from_json(tampered), usage_error);
    tampered = j;
    tampered["blocks"][0]["P"] = "31";
    EXPECT_THROW(counterexample_from_json(tampered), usage_error);
    EXPECT_THROW(counterexample_from_json(nlohmann::json::object()), usage_error);
}
