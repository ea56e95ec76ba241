#pragma once

// Acceptance suites 1-9, shared by `idsc verify` and the acceptance runner.
// Each suite is exhaustive or seeded-deterministic; empirical constants are
// compared against the baselines file with the tolerance pinned below.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "idsc/approx.hpp"
#include "idsc/arith.hpp"
#include "idsc/counterexample.hpp"
#include "idsc/experiments.hpp"
#include "idsc/overlap.hpp"
#include "idsc/rational.hpp"
#include "idsc/report.hpp"
#include "idsc/specs.hpp"

namespace idsc {

/// Empirical constants may drift at most this far from their baseline.
inline const Rational kBaselineTolerance = Rational(1, 100);

struct BoundBaseline {
    std::string psi;
    std::string y;
    Rational C;         // max exact / (addend1 + addend2)
    Rational C_trivial; // max exact / trivial_rhs
};

struct Baselines {
    std::string version = "none";
    u64 overlap_Q = 200;
    std::vector<BoundBaseline> overlap;
    u64 phigcd_Q = 100000;
    unsigned phigcd_m = 3;
    Rational phigcd_max_ratio;
    std::string ladder_psi = "div:3";
    std::string ladder_y = "rnd:99,64";
    unsigned ladder_m = 3;
    std::vector<u64> ladder;
    Rational ladder_max_ratio;
};

namespace detail {
inline std::string fnv1a_hex(const std::string& bytes)
{
    u64 h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf, 12);
}
} // namespace detail

inline Baselines load_baselines(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    IDSC_REQUIRE(in.good(), "cannot open baselines file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw usage_error("baselines file '" + path + "': " + e.what());
    }
    IDSC_REQUIRE(j.value("format", "") == "idsc-baselines/1", "not an idsc baselines file: " + path);
    Baselines b;
    b.version = std::to_string(j.at("version").get<int>()) + "-" + detail::fnv1a_hex(bytes);
    const auto& ov = j.at("overlap_bound");
    b.overlap_Q = ov.at("Q").get<u64>();
    for (const auto& c : ov.at("cases"))
        b.overlap.push_back({c.at("psi").get<std::string>(), c.at("y").get<std::string>(),
                             parse_rational(c.at("C").get<std::string>()),
                             parse_rational(c.at("C_trivial").get<std::string>())});
    const auto& pg = j.at("phigcd");
    b.phigcd_Q = pg.at("Q").get<u64>();
    b.phigcd_m = pg.at("m").get<unsigned>();
    b.phigcd_max_ratio = parse_rational(pg.at("max_ratio").get<std::string>());
    const auto& ld = j.at("ladder");
    b.ladder_psi = ld.at("psi").get<std::string>();
    b.ladder_y = ld.at("y").get<std::string>();
    b.ladder_m = ld.at("m").get<unsigned>();
    b.ladder = ld.at("Q").get<std::vector<u64>>();
    b.ladder_max_ratio = parse_rational(ld.at("max_ratio").get<std::string>());
    return b;
}

/// Version string for report headers; "none" when the file is missing.
inline std::string fixture_version(const std::string& path)
{
    std::ifstream in(path);
    if (!in.good()) return "none";
    try {
        return load_baselines(path).version;
    } catch (const std::exception&) {
        return "invalid";
    }
}

struct SuiteResult {
    int id = 0;
    std::string name;
    bool ok = false;
    std::string detail;
    double seconds = 0;
    double budget_seconds = 0;
};

/// What a suite function reports; run_suite adds id, name and timing.
struct Outcome {
    bool ok = true;
    std::string detail;
};

struct VerifyOptions {
    unsigned workers = 1;
    u64 seed = 1;
    bool enforce_time = true;
};

namespace suites {

inline std::string dec(const Rational& v) { return std::to_string(v.get_d()); }

inline bool within_tolerance(const Rational& value, const Rational& baseline)
{
    return abs(value - baseline) <= kBaselineTolerance * baseline;
}

inline Outcome coprime_count(const Baselines&, const VerifyOptions&)
{
    Outcome r;
    u64 residues = 0;
    for (u64 q = 1; q <= 60 && r.ok; ++q)
        for (u64 s = 1; s <= 60 && r.ok; ++s) {
            const auto table = coprime_pair_count_table(q, s);
            u64 mass = 0;
            for (u64 v : table) mass += v;
            if (mass != totient(q) * totient(s)) {
                r.ok = false;
                r.detail = "mass mismatch at q=" + std::to_string(q) + " r=" + std::to_string(s);
            }
            if (s >= q) continue;
            const auto d = decompose_pair(q, s);
            for (u64 c = 0; c < table.size(); ++c, ++residues)
                if (coprime_pair_count_formula(d, static_cast<i64>(c)) != table[c]) {
                    r.ok = false;
                    r.detail = "formula != brute force at q=" + std::to_string(q) + " r=" + std::to_string(s) +
                               " c=" + std::to_string(c);
                    break;
                }
        }
    if (r.ok) r.detail = std::to_string(residues) + " residues, 3600 mass checks";
    return r;
}

inline Outcome sumset(const Baselines&, const VerifyOptions&)
{
    Outcome r;
    u64 checks = 0;
    for (u64 q = 1; q <= 2310 && r.ok; ++q) {
        const auto f = factorize(q);
        bool squarefree = true;
        for (auto pe : f) squarefree = squarefree && pe.exponent == 1;
        if (!squarefree) continue;
        const auto want = reduced_fractions(q).points;
        for (u64 d : detail::divisors_of(f)) {
            ++checks;
            if (sumset_reduced(d, q / d) != want) {
                r.ok = false;
                r.detail = "sumset differs at q=" + std::to_string(q) + " r=" + std::to_string(d);
                break;
            }
        }
    }
    if (r.ok) r.detail = std::to_string(checks) + " (q, r) pairs";
    return r;
}

inline Outcome exact_measure(const Baselines&, const VerifyOptions& opt)
{
    Outcome r;
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<long> den(1, 1000);
    u64 checks = 0;
    for (u64 q = 1; q <= 500 && r.ok; ++q)
        for (const Rational& psi : {Rational(1, 4), Rational(1, 3), Rational(1, 2)})
            for (int k = 0; k < 20; ++k) {
                const long d = den(rng);
                const Rational y = make_rational(std::uniform_int_distribution<long>(0, d - 1)(rng), d);
                const auto c = closed_form_check(q, psi, y);
                ++checks;
                if (!c.equality_expected || c.measure != c.closed_form) {
                    r.ok = false;
                    r.detail = "q=" + std::to_string(q) + " psi=" + to_string(psi) + " y=" + to_string(y) +
                               ": measure " + to_string(c.measure) + " != " + to_string(c.closed_form);
                    break;
                }
            }
    if (r.ok) r.detail = std::to_string(checks) + " exact equalities";
    return r;
}

struct BoundScan {
    Rational C = 0, C_trivial = 0;
    u64 argq = 0, argr = 0;
    bool finite = true;
};

/// Max of exact/(addend1 + addend2) and exact/trivial_rhs over r < q <= Q.
inline BoundScan bound_scan(u64 Q, const ApproxFunction& psi, const TargetSequence& y, unsigned workers = 1)
{
    std::vector<BoundScan> per(Q + 1);
    run_workers(workers, [&](unsigned w) {
        for (u64 q = 1 + w; q <= Q; q += workers) {
            BoundScan& s = per[q];
            for (u64 r = 1; r < q; ++r) {
                const auto rep = overlap_report(q, r, psi(q), psi(r), y(q)[0], y(r)[0]);
                if (rep.exact_overlap == 0) continue;
                const Rational rhs = rep.bound.total();
                if (rhs == 0 || *rep.trivial_rhs == 0) {
                    s.finite = false;
                    continue;
                }
                const Rational c = rep.exact_overlap / rhs;
                if (c > s.C) {
                    s.C = c;
                    s.argq = q;
                    s.argr = r;
                }
                s.C_trivial = rmax(s.C_trivial, rep.exact_overlap / *rep.trivial_rhs);
            }
        }
    });
    BoundScan out;
    for (const auto& s : per) {
        out.finite = out.finite && s.finite;
        if (s.C > out.C) {
            out.C = s.C;
            out.argq = s.argq;
            out.argr = s.argr;
        }
        out.C_trivial = rmax(out.C_trivial, s.C_trivial);
    }
    return out;
}

inline Outcome overlap_bound(const Baselines& b, const VerifyOptions& opt)
{
    Outcome r;
    IDSC_REQUIRE(!b.overlap.empty(), "baselines: no overlap_bound cases");
    for (const auto& c : b.overlap) {
        const auto scan = bound_scan(b.overlap_Q, ApproxFunction::parse(c.psi), TargetSequence::parse(c.y, 1), opt.workers);
        const bool ok = scan.finite && within_tolerance(scan.C, c.C) && within_tolerance(scan.C_trivial, c.C_trivial);
        r.ok = r.ok && ok;
        r.detail += (r.detail.empty() ? "" : "; ") + c.psi + "/" + c.y + " C=" + to_string(scan.C) + " (" +
                    dec(scan.C) + " at " + std::to_string(scan.argq) + "," + std::to_string(scan.argr) +
                    ") C'=" + to_string(scan.C_trivial) + (ok ? "" : " OUT OF TOLERANCE");
    }
    return r;
}

inline Outcome counterexample(const Baselines&, const VerifyOptions&)
{
    Outcome r;
    struct Case {
        std::string label;
        CounterexampleInstance inst;
        Rational expected;
    };
    const Rational half(1, 2);
    std::vector<Case> cases;
    cases.push_back({"J=1 eps=1/2", build_counterexample(BlockSchedule{{half}}), make_rational(1, 3)});
    cases.push_back({"primes 2,3,5", counterexample_from_primes({{2, 3, 5}}, {half}), make_rational(4, 15)});
    cases.push_back({"primes 2..7", counterexample_from_primes({{2, 3, 5, 7}}, {half}), make_rational(8, 35)});
    cases.push_back({"primes 2..11", counterexample_from_primes({{2, 3, 5, 7, 11}}, {half}), make_rational(16, 77)});
    for (const auto& c : cases) {
        const Block& blk = c.inst.block(0);
        const bool contained = verify_containment(c.inst, 0);
        const auto m = verify_block_measure(c.inst, 0);
        const auto div = divergence_partial_sum(c.inst, 1);
        const Rational closed = make_rational(blk.P - 1, 2 * blk.P);
        const bool ok = contained && m.ok && m.measure == m.bound && m.bound == c.expected && div.ok &&
                        div.direct == closed;
        r.ok = r.ok && ok;
        r.detail += (r.detail.empty() ? "" : "; ") + c.label + " P=" + to_string(blk.P) + " measure=" +
                    to_string(m.measure) + " sum=" + to_string(div.direct) + (ok ? "" : " FAILED");
    }
    // Two paper-mode blocks: divergence sum only (block 2 is far too large to enumerate).
    const auto two = build_counterexample(BlockSchedule::halving(2));
    const auto div2 = divergence_partial_sum(two, 2);
    Rational closed2 = 0;
    for (std::size_t j = 0; j < 2; ++j) closed2 += make_rational(two.block(j).P - 1, 2 * two.block(j).P);
    const bool ok2 = div2.ok && div2.direct == closed2;
    r.ok = r.ok && ok2;
    r.detail += "; halving J=2 sum=" + dec(div2.direct) + (ok2 ? "" : " FAILED");
    return r;
}

inline Outcome phigcd(const Baselines& b, const VerifyOptions& opt)
{
    Outcome r;
    const u64 Q = 10000;
    const SpfTable table(Q);
    const auto phi = table.totients();
    for (unsigned m = 1; m <= 4 && r.ok; ++m)
        for (u64 q = 1; q <= Q; ++q)
            if (phigcd_brute(q, m, phi) != phigcd_divisor_form(q, m, table.factorize(q))) {
                r.ok = false;
                r.detail = "brute != divisor form at q=" + std::to_string(q) + " m=" + std::to_string(m);
                break;
            }
    if (!r.ok) return r;
    const auto scan = phigcd_scan(b.phigcd_Q, b.phigcd_m, opt.workers);
    r.ok = scan.max_ratio <= b.phigcd_max_ratio * (1 + kBaselineTolerance);
    r.detail = "q<=10000 m=1..4 agree; m=" + std::to_string(b.phigcd_m) + " max ratio " + to_string(scan.max_ratio) +
               " (" + dec(scan.max_ratio) + " at q=" + std::to_string(scan.argmax) + ") vs baseline " +
               to_string(b.phigcd_max_ratio);
    return r;
}

inline Outcome sifted(const Baselines&, const VerifyOptions& opt)
{
    Outcome r;
    static const u64 small_primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    std::mt19937_64 rng(opt.seed);
    u64 enumerated = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        // n: up to 8 distinct primes, some squared, kept below 2^62.
        u64 n = 1;
        const int omega = std::uniform_int_distribution<int>(0, 8)(rng);
        std::vector<u64> pool(std::begin(small_primes), std::end(small_primes));
        std::shuffle(pool.begin(), pool.end(), rng);
        for (int i = 0; i < omega; ++i) {
            n *= pool[i];
            if (rng() % 4 == 0 && n < (u64{1} << 40)) n *= pool[i];
        }
        const bool small = trial % 2 == 0;
        const long span = small ? 2000 : 1000000000L;
        const long x_den = std::uniform_int_distribution<long>(1, 12)(rng);
        const Rational X = make_rational(std::uniform_int_distribution<long>(-span, span)(rng), x_den);
        const Rational Y = X + make_rational(std::uniform_int_distribution<long>(0, span)(rng), 7);
        const auto s = sifted_interval_count(X, Y, n);
        bool ok = s.error <= Rational(Natural(1) << s.omega);
        if (small) {
            Natural direct = 0;
            for (Natural c = ceil_of(X); Rational(c) <= Y; ++c) {
                Natural g;
                mpz_gcd(g.get_mpz_t(), c.get_mpz_t(), to_natural(n).get_mpz_t());
                if (g == 1) ++direct;
            }
            ok = ok && direct == s.count;
            ++enumerated;
        }
        if (!ok) {
            r.ok = false;
            r.detail = "failed at X=" + to_string(X) + " Y=" + to_string(Y) + " n=" + std::to_string(n);
            return r;
        }
    }
    r.detail = "10000 triples, " + std::to_string(enumerated) + " also enumerated";
    return r;
}

inline Outcome ladder(const Baselines& b, const VerifyOptions&)
{
    Outcome r;
    ExperimentConfig cfg;
    cfg.m = b.ladder_m;
    cfg.Q = *std::max_element(b.ladder.begin(), b.ladder.end());
    cfg.psi = parse_psi(b.ladder_psi);
    cfg.y = parse_target(b.ladder_y, cfg.m);
    std::vector<std::vector<std::string>> runs;
    std::vector<LadderPoint> points;
    for (unsigned w : {1u, 4u, 8u}) {
        cfg.workers = w;
        const auto rep = pairwise_overlap_sum(cfg, b.ladder);
        std::vector<std::string> bits;
        for (const auto& p : rep.ladder) bits.push_back(p.ratio ? fmt_bounds(*p.ratio) : "undef");
        runs.push_back(std::move(bits));
        if (w == 1) points = rep.ladder;
    }
    const bool identical = runs[0] == runs[1] && runs[0] == runs[2];
    bool bounded = true;
    std::string ratios;
    for (const auto& p : points) {
        const bool ok = p.ratio && p.ratio->upper <= b.ladder_max_ratio * (1 + kBaselineTolerance);
        bounded = bounded && ok;
        ratios += (ratios.empty() ? "" : " ") + std::to_string(p.Q) + ":" + (p.ratio ? dec(p.ratio->lower) : "undef");
    }
    r.ok = identical && bounded;
    r.detail = "ratios " + ratios + (identical ? "; identical for 1/4/8 workers" : "; WORKER MISMATCH") +
               (bounded ? "" : "; ABOVE BASELINE");
    return r;
}

inline Outcome monte_carlo(const Baselines&, const VerifyOptions& opt)
{
    Outcome r;
    struct Config {
        std::string psi, y;
        unsigned m;
        u64 q_lo, q_hi;
        std::optional<CounterexampleInstance> cx;
    };
    const Rational half(1, 2);
    std::vector<Config> configs{
        {"const:1/4", "zero", 1, 2, 2, {}},
        {"const:1/3", "zero", 1, 3, 3, {}},
        {"const:1/2", "rnd:1,97", 1, 7, 7, {}},
        {"pow:1/4,1/2", "zero", 1, 2, 12, {}},
        {"pow:1/8,1", "rnd:11,9", 1, 2, 30, {}},
        {"const:1/10", "const:1/3", 1, 5, 40, {}},
        {"div:3", "rnd:5,13", 1, 11, 11, {}},
        {"", "", 1, 1, 6, build_counterexample(BlockSchedule{{half}})},
        {"", "", 1, 1, 30, counterexample_from_primes({{2, 3, 5}}, {half})},
        {"", "", 1, 1, 210, counterexample_from_primes({{2, 3, 5, 7}}, {half})},
        {"const:1/4", "zero", 2, 3, 3, {}},
        {"pow:1/2,0", "rnd:2,7", 2, 5, 5, {}},
        {"const:1/3", "const:1/5", 2, 6, 6, {}},
        {"div:2", "rnd:3,11", 2, 10, 10, {}},
        {"const:1/2", "zero", 2, 4, 4, {}},
        {"const:1/4", "zero", 3, 2, 2, {}},
        {"const:1/2", "zero", 3, 3, 3, {}},
        {"div:3", "rnd:99,64", 3, 7, 7, {}},
        {"const:1/2", "rnd:4,5", 3, 12, 12, {}},
        {"const:1/3", "const:1/7", 3, 9, 9, {}},
    };
    const u64 samples = 100000;
    std::vector<ExperimentConfig> built;
    std::vector<double> exact;
    for (const auto& c : configs) {
        ExperimentConfig cfg;
        cfg.m = c.m;
        cfg.workers = opt.workers;
        if (c.cx) {
            cfg.psi = c.cx->psi_function("cx");
            cfg.y = c.cx->target_sequence(c.m, "cx");
        } else {
            cfg.psi = ApproxFunction::parse(c.psi);
            cfg.y = TargetSequence::parse(c.y, c.m);
        }
        exact.push_back(union_measure_exact(cfg, c.q_lo, c.q_hi).get_d());
        built.push_back(std::move(cfg));
    }
    std::string per_seed;
    for (u64 seed : {opt.seed, opt.seed + 1, opt.seed + 2}) {
        int covered = 0;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            ExperimentConfig cfg = built[i];
            cfg.seed = seed;
            const auto est = mc_coverage(cfg, configs[i].q_lo, configs[i].q_hi, samples);
            if (est.covers(exact[i])) ++covered;
            if (seed == opt.seed && i % 5 == 0) {
                // Same seed, different worker count: identical hit count.
                cfg.workers = cfg.workers == 1 ? 3 : 1;
                if (mc_coverage(cfg, configs[i].q_lo, configs[i].q_hi, samples).hits != est.hits) {
                    r.ok = false;
                    r.detail = "hits depend on worker count for config " + std::to_string(i + 1);
                    return r;
                }
            }
        }
        r.ok = r.ok && covered >= 19;
        per_seed += (per_seed.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + ": " +
                    std::to_string(covered) + "/20";
    }
    r.detail = per_seed + " inside 3-sigma";
    return r;
}

} // namespace suites

struct Suite {
    std::string name;
    double budget_seconds;
    std::function<Outcome(const Baselines&, const VerifyOptions&)> run;
};

inline const std::vector<Suite>& all_suites()
{
    static const std::vector<Suite> s{
        {"coprime-count oracle equivalence", 60, suites::coprime_count},
        {"reduced-fraction sumset", 60, suites::sumset},
        {"exact measure law", 60, suites::exact_measure},
        {"overlap bound soundness", 300, suites::overlap_bound},
        {"counterexample verification", 120, suites::counterexample},
        {"phi(gcd) sums", 120, suites::phigcd},
        {"sifted interval counts", 60, suites::sifted},
        {"quasi-independence ladder", 600, suites::ladder},
        {"Monte Carlo calibration", 120, suites::monte_carlo},
    };
    return s;
}

/// Runs one suite, times it, and turns library errors into a failed result.
inline SuiteResult run_suite(int id, const Baselines& b, const VerifyOptions& opt)
{
    IDSC_REQUIRE(id >= 1 && id <= static_cast<int>(all_suites().size()), "suite must be 1..9 or all");
    const Suite& suite = all_suites()[id - 1];
    SuiteResult r;
    r.id = id;
    r.name = suite.name;
    r.budget_seconds = suite.budget_seconds;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Outcome o = suite.run(b, opt);
        r.ok = o.ok;
        r.detail = std::move(o.detail);
    } catch (const usage_error&) {
        throw;
    } catch (const std::exception& e) {
        r.ok = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.enforce_time && r.budget_seconds > 0 && r.seconds > r.budget_seconds) {
        r.ok = false;
        r.detail += "; exceeded " + std::to_string(static_cast<int>(r.budget_seconds)) + "s budget";
    }
    return r;
}

} // namespace idsc
