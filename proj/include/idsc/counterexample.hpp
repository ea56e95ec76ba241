#pragma once

// The moving-target counterexample: blocks of consecutive primes with
// primorial-like products P_j, psi(q) = q / (2 P_j) on the divisors q > 1 of
// P_j, and targets y_q with y_q / q in Q'_{P_j / q}. Every A_q of a block
// then sits inside the thickening of Q'_{P_j} by 1/(2 P_j), whose measure is
// phi(P_j)/P_j, while the divergence sum gains (P_j - 1)/(2 P_j) per block.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idsc/approx.hpp"
#include "idsc/arith.hpp"
#include "idsc/errors.hpp"
#include "idsc/rational.hpp"
#include "idsc/torus.hpp"

namespace idsc {

enum class PrimeGapMode {
    paper, // first prime of block j exceeds P_{j-1}
    desk,  // first prime of block j exceeds the largest prime used so far
};

inline std::string to_string(PrimeGapMode m) { return m == PrimeGapMode::paper ? "paper" : "desk"; }

inline PrimeGapMode parse_prime_gap_mode(const std::string& s)
{
    if (s == "paper") return PrimeGapMode::paper;
    if (s == "desk") return PrimeGapMode::desk;
    throw usage_error("prime gap mode must be 'paper' or 'desk', got '" + s + "'");
}

struct BlockSchedule {
    std::vector<Rational> eps; // one per block, each in (0, 1]
    PrimeGapMode mode = PrimeGapMode::paper;
    std::size_t prime_cap = kDefaultPrimeCap;

    /// eps_j = 2^-j for j = 1..J.
    static BlockSchedule halving(std::size_t J, PrimeGapMode mode = PrimeGapMode::paper)
    {
        BlockSchedule s;
        s.mode = mode;
        for (std::size_t j = 1; j <= J; ++j) s.eps.push_back(Rational(1, Natural(1) << static_cast<unsigned>(j)));
        return s;
    }

    std::size_t blocks() const { return eps.size(); }
};

/// Divisor enumeration and exact set construction refuse beyond these.
struct CounterexampleBudget {
    std::size_t max_divisor_primes = 20;   // 2^20 divisors
    u64 max_pieces = 1000000;              // phi(P_j) interval pieces
};

struct Block {
    std::vector<Natural> primes;
    Natural P;
    Rational eps;
    Rational density; // phi(P)/P
    /// Numerators a of y_q / q = a / (P/q) that differ from the default.
    std::map<Natural, Natural> residue_overrides;

    bool contains(const Natural& q) const { return q > 1 && P % q == 0; }
};

class CounterexampleInstance {
public:
    CounterexampleInstance(std::vector<Block> blocks, BlockSchedule schedule)
        : blocks_(std::move(blocks)), schedule_(std::move(schedule))
    {
        check_invariants();
    }

    const std::vector<Block>& blocks() const { return blocks_; }
    const BlockSchedule& schedule() const { return schedule_; }
    std::size_t size() const { return blocks_.size(); }

    /// Index of the block containing q, if any.
    std::optional<std::size_t> block_of(const Natural& q) const
    {
        for (std::size_t j = 0; j < blocks_.size(); ++j)
            if (blocks_[j].contains(q)) return j;
        return std::nullopt;
    }

    Rational psi(const Natural& q) const
    {
        auto j = block_of(q);
        if (!j) return 0;
        return make_rational(q, 2 * blocks_[*j].P);
    }

    /// Numerator a with y_q / q = a / (P_j / q): 1 by default, 0 when
    /// P_j / q = 1.
    Natural residue_choice(const Natural& q) const
    {
        auto j = block_of(q);
        if (!j) return 0;
        const Block& b = blocks_[*j];
        auto it = b.residue_overrides.find(q);
        if (it != b.residue_overrides.end()) return it->second;
        return b.P == q ? Natural(0) : Natural(1);
    }

    /// y_q = a q^2 / P_j on blocks, 0 elsewhere.
    Rational target(const Natural& q) const
    {
        auto j = block_of(q);
        if (!j) return 0;
        return make_rational(residue_choice(q) * q * q, blocks_[*j].P);
    }

    /// B_j = divisors of P_j exceeding 1, increasing.
    std::vector<Natural> block_members(std::size_t j, const CounterexampleBudget& budget = {}) const
    {
        const Block& b = block(j);
        if (b.primes.size() > budget.max_divisor_primes)
            throw budget_error("block " + std::to_string(j + 1) + " has " + std::to_string(b.primes.size()) +
                               " primes; divisor enumeration is capped at " +
                               std::to_string(budget.max_divisor_primes));
        std::vector<Natural> divisors{Natural(1)};
        for (const auto& p : b.primes) {
            const std::size_t n = divisors.size();
            for (std::size_t i = 0; i < n; ++i) divisors.push_back(divisors[i] * p);
        }
        std::sort(divisors.begin(), divisors.end());
        divisors.erase(divisors.begin());
        return divisors;
    }

    const Block& block(std::size_t j) const
    {
        IDSC_REQUIRE(j < blocks_.size(), "block index " + std::to_string(j + 1) + " out of range");
        return blocks_[j];
    }

    ApproxFunction psi_function(std::string label) const
    {
        auto self = std::make_shared<const CounterexampleInstance>(*this);
        return ApproxFunction::custom([self](u64 q) { return self->psi(to_natural(q)); }, std::move(label));
    }

    TargetSequence target_sequence(unsigned m, std::string label) const
    {
        auto self = std::make_shared<const CounterexampleInstance>(*this);
        return TargetSequence::custom(
            [self, m](u64 q) { return std::vector<Rational>(m, self->target(to_natural(q))); }, m, std::move(label));
    }

private:
    void check_invariants() const
    {
        IDSC_REQUIRE(!blocks_.empty(), "counterexample needs at least one block");
        std::vector<Natural> seen;
        for (std::size_t j = 0; j < blocks_.size(); ++j) {
            const Block& b = blocks_[j];
            IDSC_REQUIRE(!b.primes.empty(), "block " + std::to_string(j + 1) + " has no primes");
            Natural P = 1;
            Rational density = 1;
            for (std::size_t i = 0; i < b.primes.size(); ++i) {
                const Natural& p = b.primes[i];
                IDSC_REQUIRE(mpz_probab_prime_p(p.get_mpz_t(), 30) != 0, "block entry " + to_string(p) + " is not prime");
                IDSC_REQUIRE(i == 0 || b.primes[i - 1] < p, "block primes must be strictly increasing");
                for (const auto& s : seen)
                    IDSC_REQUIRE(s != p, "prime " + to_string(p) + " appears in two blocks");
                P *= p;
                density *= Rational(p - 1, p);
            }
            seen.insert(seen.end(), b.primes.begin(), b.primes.end());
            IDSC_ENSURE(P == b.P, "block product mismatch");
            IDSC_ENSURE(density == b.density, "block density mismatch");
            IDSC_REQUIRE(b.eps > 0 && b.eps <= 1, "block eps must lie in (0,1]");
            IDSC_REQUIRE(b.density < b.eps, "block " + std::to_string(j + 1) + ": phi(P)/P = " + to_string(b.density) +
                                                 " is not below eps = " + to_string(b.eps));
            for (const auto& [q, a] : b.residue_overrides) {
                IDSC_REQUIRE(b.contains(q), "residue override for q=" + to_string(q) + " outside block");
                Natural cofactor = b.P / q;
                Natural g;
                mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), cofactor.get_mpz_t());
                IDSC_REQUIRE(g == 1 && a >= 0 && (a < cofactor || cofactor == 1),
                             "residue choice " + to_string(a) + " for q=" + to_string(q) + " is not reduced mod " +
                                 to_string(cofactor));
            }
        }
    }

    std::vector<Block> blocks_;
    BlockSchedule schedule_;
};

inline Block make_block(std::vector<Natural> primes, Rational eps)
{
    Block b;
    b.P = 1;
    b.density = 1;
    for (const auto& p : primes) {
        b.P *= p;
        b.density *= Rational(p - 1, p);
    }
    b.primes = std::move(primes);
    b.eps = std::move(eps);
    return b;
}

/// Block j takes the shortest run of consecutive primes above P_{j-1}
/// (paper mode) or above the largest prime used (desk mode) with density
/// below eps_j.
inline CounterexampleInstance build_counterexample(const BlockSchedule& schedule)
{
    IDSC_REQUIRE(schedule.blocks() >= 1, "schedule needs at least one block");
    std::vector<Block> blocks;
    Natural prev_P = 1, largest = 1;
    for (std::size_t j = 0; j < schedule.blocks(); ++j) {
        const Natural& floor_value = schedule.mode == PrimeGapMode::paper ? prev_P : largest;
        PrimeRun run;
        try {
            run = primes_for_epsilon(floor_value, schedule.eps[j], schedule.prime_cap);
        } catch (const prime_budget_error& e) {
            throw budget_error("block " + std::to_string(j + 1) + ": " + e.what());
        }
        blocks.push_back(make_block(std::move(run.primes), schedule.eps[j]));
        prev_P = blocks.back().P;
        largest = blocks.back().primes.back();
    }
    return CounterexampleInstance(std::move(blocks), schedule);
}

/// Explicit prime blocks (fixtures); every block must still satisfy its eps.
inline CounterexampleInstance counterexample_from_primes(const std::vector<std::vector<u64>>& prime_blocks,
                                                         const std::vector<Rational>& eps)
{
    IDSC_REQUIRE(prime_blocks.size() == eps.size(), "one eps per prime block required");
    std::vector<Block> blocks;
    BlockSchedule schedule;
    schedule.eps = eps;
    schedule.mode = PrimeGapMode::desk;
    for (std::size_t j = 0; j < prime_blocks.size(); ++j) {
        std::vector<Natural> primes;
        for (u64 p : prime_blocks[j]) primes.push_back(to_natural(p));
        blocks.push_back(make_block(std::move(primes), eps[j]));
    }
    return CounterexampleInstance(std::move(blocks), schedule);
}

// ---------------------------------------------------------------------------

namespace detail {
inline void check_piece_budget(const CounterexampleInstance& inst, std::size_t j, const CounterexampleBudget& budget)
{
    const Block& b = inst.block(j);
    Natural phi = 1;
    for (const auto& p : b.primes) phi *= p - 1;
    if (phi > to_natural(budget.max_pieces))
        throw budget_error("block " + std::to_string(j + 1) + " needs " + to_string(phi) +
                           " interval pieces; budget is " + std::to_string(budget.max_pieces));
}
} // namespace detail

/// Union over q in B_j of A_q^{y_q}.
inline TorusIntervalSet block_union_set(const CounterexampleInstance& inst, std::size_t j,
                                        const CounterexampleBudget& budget = {})
{
    detail::check_piece_budget(inst, j, budget);
    TorusIntervalSet out;
    for (const auto& q : inst.block_members(j, budget)) {
        out = set_union(out, build_Aq(to_u64(q), inst.psi(q), inst.target(q)));
    }
    return out;
}

/// Q'_{P_j} thickened by the radius 1/(2 P_j).
inline TorusIntervalSet thickened_reduced_fractions(const CounterexampleInstance& inst, std::size_t j,
                                                    const CounterexampleBudget& budget = {})
{
    detail::check_piece_budget(inst, j, budget);
    return build_Aq(to_u64(inst.block(j).P), Rational(1, 2), 0);
}

inline bool verify_containment(const CounterexampleInstance& inst, std::size_t j,
                               const CounterexampleBudget& budget = {})
{
    return is_subset(block_union_set(inst, j, budget), thickened_reduced_fractions(inst, j, budget));
}

struct BlockMeasureCheck {
    Rational measure; // lambda(union of A_q, q in B_j)
    Rational bound;   // phi(P_j)/P_j
    bool ok;          // measure <= bound and bound < eps_j
};

inline BlockMeasureCheck verify_block_measure(const CounterexampleInstance& inst, std::size_t j,
                                              const CounterexampleBudget& budget = {})
{
    BlockMeasureCheck c;
    c.measure = block_union_set(inst, j, budget).measure();
    c.bound = inst.block(j).density;
    c.ok = c.measure <= c.bound && c.bound < inst.block(j).eps;
    return c;
}

struct DivergenceSum {
    Rational direct;      // sum over j, q in B_j of phi(q) psi(q) / q
    Rational closed_form; // sum over j of (P_j - 1) / (2 P_j)
    bool ok;
};

/// Blocks small enough to enumerate are summed divisor by divisor; larger
/// blocks use sum_{d | P} phi(d) = prod_p (1 + (p - 1)), computed from the
/// primes rather than from P.
inline DivergenceSum divergence_partial_sum(const CounterexampleInstance& inst, std::size_t blocks,
                                            const CounterexampleBudget& budget = {})
{
    IDSC_REQUIRE(blocks <= inst.size(), "divergence_partial_sum: more blocks requested than built");
    DivergenceSum s{0, 0, true};
    for (std::size_t j = 0; j < blocks; ++j) {
        const Block& b = inst.block(j);
        if (b.primes.size() <= budget.max_divisor_primes && fits_u64(b.P)) {
            for (const auto& q : inst.block_members(j, budget)) {
                const u64 qq = to_u64(q);
                s.direct += make_rational(to_natural(totient(qq)), q) * inst.psi(q);
            }
        } else {
            Natural phi_sum = 1;
            for (const auto& p : b.primes) phi_sum *= 1 + (p - 1);
            s.direct += make_rational(phi_sum - 1, 2 * b.P);
        }
        s.closed_form += make_rational(b.P - 1, 2 * b.P);
    }
    s.ok = s.direct == s.closed_form;
    return s;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const CounterexampleInstance& inst, const CounterexampleBudget& budget = {})
{
    nlohmann::json j;
    j["format"] = "idsc-counterexample/1";
    j["mode"] = to_string(inst.schedule().mode);
    j["blocks"] = nlohmann::json::array();
    for (std::size_t b = 0; b < inst.size(); ++b) {
        const Block& blk = inst.block(b);
        nlohmann::json jb;
        jb["eps"] = to_string(blk.eps);
        jb["primes"] = nlohmann::json::array();
        for (const auto& p : blk.primes) jb["primes"].push_back(to_string(p));
        jb["P"] = to_string(blk.P);
        jb["density"] = to_string(blk.density);
        nlohmann::json overrides = nlohmann::json::object();
        for (const auto& [q, a] : blk.residue_overrides) overrides[to_string(q)] = to_string(a);
        jb["residue_overrides"] = overrides;
        if (blk.primes.size() <= budget.max_divisor_primes) {
            nlohmann::json members = nlohmann::json::array();
            nlohmann::json psi = nlohmann::json::object(), y = nlohmann::json::object();
            for (const auto& q : inst.block_members(b, budget)) {
                members.push_back(to_string(q));
                psi[to_string(q)] = to_string(inst.psi(q));
                y[to_string(q)] = to_string(inst.target(q));
            }
            jb["B"] = members;
            jb["psi"] = psi;
            jb["y"] = y;
        }
        j["blocks"].push_back(jb);
    }
    return j;
}

/// Rebuilds from primes, eps and residue choices, then checks every stored
/// derived value against the rebuilt instance.
inline CounterexampleInstance counterexample_from_json(const nlohmann::json& j)
{
    IDSC_REQUIRE(j.value("format", "") == "idsc-counterexample/1", "not an idsc counterexample instance");
    BlockSchedule schedule;
    schedule.mode = parse_prime_gap_mode(j.at("mode").get<std::string>());
    std::vector<Block> blocks;
    for (const auto& jb : j.at("blocks")) {
        std::vector<Natural> primes;
        for (const auto& p : jb.at("primes")) primes.push_back(parse_natural(p.get<std::string>()));
        Block b = make_block(std::move(primes), parse_rational(jb.at("eps").get<std::string>()));
        if (jb.contains("residue_overrides"))
            for (const auto& [q, a] : jb.at("residue_overrides").items())
                b.residue_overrides[parse_natural(q)] = parse_natural(a.get<std::string>());
        schedule.eps.push_back(b.eps);
        blocks.push_back(std::move(b));
    }
    CounterexampleInstance inst(std::move(blocks), schedule);
    for (std::size_t b = 0; b < inst.size(); ++b) {
        const auto& jb = j.at("blocks").at(b);
        const Block& blk = inst.block(b);
        IDSC_REQUIRE(parse_natural(jb.at("P").get<std::string>()) == blk.P, "stored P does not match primes");
        IDSC_REQUIRE(parse_rational(jb.at("density").get<std::string>()) == blk.density,
                     "stored density does not match primes");
        if (jb.contains("psi")) {
            for (const auto& [q, v] : jb.at("psi").items())
                IDSC_REQUIRE(inst.psi(parse_natural(q)) == parse_rational(v.get<std::string>()),
                             "stored psi(" + q + ") does not match rebuilt instance");
            for (const auto& [q, v] : jb.at("y").items())
                IDSC_REQUIRE(inst.target(parse_natural(q)) == parse_rational(v.get<std::string>()),
                             "stored y(" + q + ") does not match rebuilt instance");
        }
    }
    return inst;
}

} // namespace idsc
