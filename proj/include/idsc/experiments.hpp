#pragma once

// Batch experiments over q <= Q: the pairwise overlap sum against the squared
// measure sum, the averaged main-term sum, phi(gcd) power sums, Monte Carlo
// coverage and equidistribution scans.
//
// Pair scans are split into rows (one per q, covering r < q). Rows are
// computed by worker q mod W and merged in increasing q, so exact results and
// enclosures alike are identical for any worker count. Prefix sums of the
// rows give every Q of a ladder in one pass.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "idsc/approx.hpp"
#include "idsc/arith.hpp"
#include "idsc/enclosure.hpp"
#include "idsc/errors.hpp"
#include "idsc/overlap.hpp"
#include "idsc/parallel.hpp"
#include "idsc/rational.hpp"
#include "idsc/torus.hpp"

namespace idsc {

enum class Accumulation { exact, enclosure };

inline std::string to_string(Accumulation a) { return a == Accumulation::exact ? "exact" : "enclosure"; }

struct ExperimentConfig {
    u64 Q = 16;
    unsigned m = 1;
    ApproxFunction psi = ApproxFunction::constant(Rational(1, 4));
    TargetSequence y = TargetSequence::zero(1);
    Accumulation accumulation = Accumulation::exact;
    unsigned precision_bits = 128;
    unsigned workers = 1;
    u64 seed = 0;
    /// Exact accumulation refuses beyond this Q (denominators grow with lcm).
    u64 exact_q_cap = 512;
    Indicator indicator = Indicator::inclusive;
    /// Reject psi(q) > 1/2 where the identities need it.
    bool require_half = true;

    void validate() const
    {
        IDSC_REQUIRE(Q >= 2, "Q must be >= 2");
        IDSC_REQUIRE(m >= 1, "m must be >= 1");
        IDSC_REQUIRE(y.dimension() == m, "target dimension " + std::to_string(y.dimension()) + " does not match m=" +
                                             std::to_string(m));
        IDSC_REQUIRE(workers >= 1, "workers must be >= 1");
        IDSC_REQUIRE(accumulation == Accumulation::exact || precision_bits >= 64,
                     "enclosure precision must be >= 64 bits");
        if (accumulation == Accumulation::exact && Q > exact_q_cap)
            throw budget_error("exact accumulation is capped at Q=" + std::to_string(exact_q_cap) +
                               "; use enclosure mode for Q=" + std::to_string(Q));
    }
};

/// Value at one Q of a ladder.
struct LadderPoint {
    u64 Q;
    Bounds pair_sum;
    Bounds measure_sum;
    std::optional<Bounds> ratio; // pair_sum / measure_sum^2; absent when measure_sum is 0
};

struct SumReport {
    Bounds pair_sum;
    Bounds measure_sum;
    std::optional<Bounds> ratio;
    std::vector<LadderPoint> ladder;
    /// Named side quantities (e.g. the two addends of a bound).
    std::vector<std::pair<std::string, Bounds>> breakdown;
};

namespace detail {

/// Per-row partial sums that either stay exact or carry directed bounds.
class Accumulator {
public:
    Accumulator(Accumulation mode, unsigned bits) : mode_(mode), enc_(std::max(bits, 64u)) {}
    void add(const Rational& v)
    {
        if (v == 0) return;
        if (mode_ == Accumulation::exact)
            exact_ += v;
        else
            enc_.add(v);
    }
    void add(const Accumulator& o)
    {
        if (mode_ == Accumulation::exact)
            exact_ += o.exact_;
        else
            enc_.add(o.enc_);
    }
    Bounds bounds() const { return mode_ == Accumulation::exact ? Bounds::exact(exact_) : enc_.bounds(); }

private:
    Accumulation mode_;
    Rational exact_ = 0;
    DirectedSum enc_;
};

inline std::optional<Bounds> ratio_of(const Bounds& pair, const Bounds& meas)
{
    if (meas.lower <= 0) return std::nullopt;
    if (pair.is_exact() && meas.is_exact()) return Bounds::exact(pair.lower / (meas.lower * meas.lower));
    return ratio_over_square(pair, meas);
}

inline std::vector<u64> ladder_points(std::vector<u64> ladder, u64 Q)
{
    if (ladder.empty()) ladder.push_back(Q);
    std::sort(ladder.begin(), ladder.end());
    ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
    IDSC_REQUIRE(ladder.front() >= 1 && ladder.back() <= Q, "ladder points must lie in [1, Q]");
    return ladder;
}

/// One A_q^{y_k} per coordinate, with the integer fast path when available.
struct CoordinateSet {
    TorusIntervalSet set;
    std::optional<ScaledIntervalSet> scaled;
    Rational measure;
};

struct RowSets {
    Rational psi;
    std::vector<CoordinateSet> coords;
    Rational product_measure;
};

inline Rational coordinate_overlap(const CoordinateSet& a, const CoordinateSet& b)
{
    if (a.set.empty() || b.set.empty()) return 0;
    if (a.scaled && b.scaled) return intersection_measure(*a.scaled, *b.scaled);
    return intersect(a.set, b.set).measure();
}

inline std::vector<RowSets> build_rows(const ExperimentConfig& cfg)
{
    std::vector<RowSets> rows(cfg.Q + 1);
    run_workers(cfg.workers, [&](unsigned w) {
        for (u64 q = 1 + w; q <= cfg.Q; q += cfg.workers) {
            RowSets& row = rows[q];
            row.psi = cfg.psi(q);
            if (cfg.require_half && row.psi > Rational(1, 2))
                throw usage_error("psi(" + std::to_string(q) + ") = " + to_string(row.psi) +
                                  " exceeds 1/2; use a clipped family or bound-only mode");
            const auto y = cfg.y(q);
            row.product_measure = 1;
            for (unsigned k = 0; k < cfg.m; ++k) {
                CoordinateSet c;
                // Coordinates sharing a target share a set.
                auto same = std::find(y.begin(), y.begin() + k, y[k]);
                if (same != y.begin() + k) {
                    c = row.coords[static_cast<std::size_t>(same - y.begin())];
                } else {
                    c.set = build_Aq(q, row.psi, y[k]);
                    c.scaled = ScaledIntervalSet::from(c.set);
                    c.measure = c.set.measure();
                }
                row.product_measure *= c.measure;
                row.coords.push_back(std::move(c));
            }
        }
    });
    return rows;
}

} // namespace detail

/// lambda_m(A_q ∩ A_r) for the product sets: the product of the 1-d overlaps.
inline Rational pair_overlap_m(u64 q, u64 r, const ApproxFunction& psi, const TargetSequence& y)
{
    const Rational pq = psi(q), pr = psi(r);
    const auto yq = y(q), yr = y(r);
    Rational out = 1;
    for (unsigned k = 0; k < y.dimension(); ++k) out *= pair_overlap_exact(q, r, pq, pr, yq[k], yr[k]);
    return out;
}

/// Sum over ordered pairs q != r <= Q of lambda_m(A_q ∩ A_r), the measure sum
/// over q <= Q, and their ratio pair_sum / measure_sum^2, at every ladder Q.
inline SumReport pairwise_overlap_sum(const ExperimentConfig& cfg, std::vector<u64> ladder = {})
{
    cfg.validate();
    ladder = detail::ladder_points(std::move(ladder), cfg.Q);
    const auto rows = detail::build_rows(cfg);

    std::vector<std::optional<detail::Accumulator>> pair_rows(cfg.Q + 1);
    run_workers(cfg.workers, [&](unsigned w) {
        for (u64 q = 1 + w; q <= cfg.Q; q += cfg.workers) {
            detail::Accumulator acc(cfg.accumulation, cfg.precision_bits);
            if (rows[q].psi != 0) {
                for (u64 r = 1; r < q; ++r) {
                    if (rows[r].psi == 0) continue;
                    Rational term = 1;
                    for (unsigned k = 0; k < cfg.m && term != 0; ++k)
                        term *= detail::coordinate_overlap(rows[q].coords[k], rows[r].coords[k]);
                    // (q, r) and (r, q) contribute equally.
                    acc.add(2 * term);
                }
            }
            pair_rows[q].emplace(std::move(acc));
        }
    });

    SumReport rep;
    detail::Accumulator pair_total(cfg.accumulation, cfg.precision_bits);
    detail::Accumulator meas_total(cfg.accumulation, cfg.precision_bits);
    std::size_t next = 0;
    for (u64 q = 1; q <= cfg.Q; ++q) {
        pair_total.add(*pair_rows[q]);
        meas_total.add(rows[q].product_measure);
        if (next < ladder.size() && ladder[next] == q) {
            LadderPoint pt{q, pair_total.bounds(), meas_total.bounds(), std::nullopt};
            pt.ratio = detail::ratio_of(pt.pair_sum, pt.measure_sum);
            rep.ladder.push_back(std::move(pt));
            ++next;
        }
    }
    rep.pair_sum = pair_total.bounds();
    rep.measure_sum = meas_total.bounds();
    rep.ratio = detail::ratio_of(rep.pair_sum, rep.measure_sum);
    return rep;
}

/// Left side: sum over q != r <= Q of M(q,r)^m. Right side (reported as
/// measure_sum): sum over q <= Q of (phi(q) psi(q) / q)^m; ratio = left / right^2.
inline SumReport pv_Msum_check(const ExperimentConfig& cfg, std::vector<u64> ladder = {})
{
    cfg.validate();
    ladder = detail::ladder_points(std::move(ladder), cfg.Q);
    std::vector<Rational> psi(cfg.Q + 1), weight(cfg.Q + 1);
    for (u64 q = 1; q <= cfg.Q; ++q) {
        psi[q] = cfg.psi(q);
        IDSC_REQUIRE(psi[q] <= Rational(1, 2), "pv_Msum_check: psi(" + std::to_string(q) + ") exceeds 1/2");
        weight[q] = rpow(psi[q] * make_rational(to_natural(totient(q)), to_natural(q)), cfg.m);
    }
    std::vector<std::optional<detail::Accumulator>> rows(cfg.Q + 1);
    run_workers(cfg.workers, [&](unsigned w) {
        for (u64 q = 1 + w; q <= cfg.Q; q += cfg.workers) {
            detail::Accumulator acc(cfg.accumulation, cfg.precision_bits);
            if (psi[q] != 0) {
                for (u64 r = 1; r < q; ++r) {
                    if (psi[r] == 0) continue;
                    const auto d = decompose_pair(q, r);
                    const auto g = overlap_geometry(d, psi[q], psi[r], 0, 0);
                    acc.add(2 * rpow(M_term(d, psi[q], psi[r], g, cfg.indicator), cfg.m));
                }
            }
            rows[q].emplace(std::move(acc));
        }
    });

    SumReport rep;
    detail::Accumulator lhs(cfg.accumulation, cfg.precision_bits), rhs(cfg.accumulation, cfg.precision_bits);
    std::size_t next = 0;
    for (u64 q = 1; q <= cfg.Q; ++q) {
        lhs.add(*rows[q]);
        rhs.add(weight[q]);
        if (next < ladder.size() && ladder[next] == q) {
            LadderPoint pt{q, lhs.bounds(), rhs.bounds(), std::nullopt};
            pt.ratio = detail::ratio_of(pt.pair_sum, pt.measure_sum);
            rep.ladder.push_back(std::move(pt));
            ++next;
        }
    }
    rep.pair_sum = lhs.bounds();
    rep.measure_sum = rhs.bounds();
    rep.ratio = detail::ratio_of(rep.pair_sum, rep.measure_sum);
    return rep;
}

// ---------------------------------------------------------------------------
// phi(gcd) power sums

struct PhiGcdSum {
    Natural brute;        // sum_{r=1}^q phi(gcd(q,r))^m
    Natural divisor_form; // sum_{d|q} phi(d)^m phi(q/d)
};

namespace detail {

inline std::vector<u64> divisors_of(const Factorization& f)
{
    std::vector<u64> divs{1};
    for (auto [p, e] : f) {
        const std::size_t n = divs.size();
        u64 pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < n; ++i) divs.push_back(divs[i] * pk);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

// q^(m+1) bounds both sums; stay in 128 bits when that fits.
inline bool fits_u128_sums(u64 q, unsigned m) { return (m + 1) * std::log2(static_cast<double>(q) + 1) < 125; }

inline u128 pow_u128(u64 b, unsigned e)
{
    u128 v = 1;
    while (e--) v *= b;
    return v;
}

inline Natural to_natural_u128(u128 v)
{
    Natural hi = to_natural(static_cast<u64>(v >> 64)), lo = to_natural(static_cast<u64>(v));
    return (hi << 64) + lo;
}

inline Natural pow_natural(u64 b, unsigned e)
{
    Natural out;
    mpz_ui_pow_ui(out.get_mpz_t(), b, e);
    return out;
}

} // namespace detail

inline Natural phigcd_divisor_form(u64 q, unsigned m, const Factorization& f)
{
    if (detail::fits_u128_sums(q, m)) {
        u128 s = 0;
        for (u64 d : detail::divisors_of(f)) s += detail::pow_u128(totient(d), m) * totient(q / d);
        return detail::to_natural_u128(s);
    }
    Natural s = 0;
    for (u64 d : detail::divisors_of(f)) s += detail::pow_natural(totient(d), m) * to_natural(totient(q / d));
    return s;
}

/// Brute force over r with a caller-supplied totient table covering 1..q.
inline Natural phigcd_brute(u64 q, unsigned m, const std::vector<u64>& phi)
{
    IDSC_REQUIRE(phi.size() > q, "phigcd_brute: totient table too short");
    if (detail::fits_u128_sums(q, m)) {
        u128 s = 0;
        for (u64 r = 1; r <= q; ++r) s += detail::pow_u128(phi[gcd_u64(q, r)], m);
        return detail::to_natural_u128(s);
    }
    Natural s = 0;
    for (u64 r = 1; r <= q; ++r) s += detail::pow_natural(phi[gcd_u64(q, r)], m);
    return s;
}

inline PhiGcdSum phigcd_sum(u64 q, unsigned m)
{
    IDSC_REQUIRE(q >= 1 && m >= 1, "phigcd_sum: q, m must be >= 1");
    const SpfTable table(q);
    return {phigcd_brute(q, m, table.totients()), phigcd_divisor_form(q, m, table.factorize(q))};
}

struct PhiGcdScan {
    u64 Q;
    unsigned m;
    Rational max_ratio; // sum / phi(q)^m for m >= 3, sum / q^2 for m <= 2
    u64 argmax;
};

/// Max over 1 <= q <= Q of the normalised divisor-form sum.
inline PhiGcdScan phigcd_scan(u64 Q, unsigned m, unsigned workers = 1)
{
    IDSC_REQUIRE(Q >= 1 && m >= 1, "phigcd_scan: Q, m must be >= 1");
    const SpfTable table(Q);
    std::vector<std::pair<Rational, u64>> best(std::max(workers, 1u), {Rational(0), 0});
    run_workers(std::max(workers, 1u), [&](unsigned w) {
        for (u64 q = 1 + w; q <= Q; q += std::max(workers, 1u)) {
            const auto f = table.factorize(q);
            const Natural s = phigcd_divisor_form(q, m, f);
            const Natural norm = m >= 3 ? detail::pow_natural(totient(f), m) : detail::pow_natural(q, 2);
            Rational ratio = make_rational(s, norm);
            ratio.canonicalize();
            if (ratio > best[w].first) best[w] = {ratio, q};
        }
    });
    PhiGcdScan out{Q, m, 0, 0};
    for (const auto& [ratio, q] : best)
        if (ratio > out.max_ratio || (ratio == out.max_ratio && q < out.argmax)) {
            out.max_ratio = ratio;
            out.argmax = q;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo coverage

struct McEstimate {
    u64 hits = 0;
    u64 samples = 0;
    u64 seed = 0;
    unsigned m = 1;
    bool grid = false;
    double estimate = 0;
    double wilson95_lo = 0, wilson95_hi = 0; // z = 1.96
    double sigma3_lo = 0, sigma3_hi = 0;     // Wilson score interval at z = 3

    bool covers(double exact) const { return sigma3_lo <= exact && exact <= sigma3_hi; }
};

namespace detail {

inline std::pair<double, double> wilson(u64 hits, u64 n, double z)
{
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double denom = 1 + z * z / nn;
    const double centre = (p + z * z / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
    const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = hits == n ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

/// Counter-based: the k-th coordinate of sample i depends only on (seed, i, k).
inline u64 sample_bits(u64 seed, u64 index, unsigned coord)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 8 + coord)) >> 11;
}

} // namespace detail

/// Fraction of points x in [0,1)^m lying in the union over q in
/// [q_lo, q_hi] of the product sets A_q^{y_q}. Samples are dyadic (53 bits),
/// so every membership test is exact.
inline McEstimate mc_coverage(const ExperimentConfig& cfg, u64 q_lo, u64 q_hi, u64 samples, bool grid = false)
{
    IDSC_REQUIRE(cfg.m >= 1 && cfg.m <= 3, "mc_coverage: m must be 1..3");
    IDSC_REQUIRE(cfg.y.dimension() == cfg.m, "mc_coverage: target dimension does not match m");
    IDSC_REQUIRE(samples >= 1000, "mc_coverage: need at least 1000 samples");
    IDSC_REQUIRE(q_lo >= 1 && q_lo <= q_hi, "mc_coverage: need 1 <= q_lo <= q_hi");

    struct Tester {
        std::vector<DyadicHitTester> coords;
    };
    std::vector<Tester> testers;
    for (u64 q = q_lo; q <= q_hi; ++q) {
        const Rational psi = cfg.psi(q);
        if (psi == 0) continue;
        Tester t;
        for (const auto& yk : cfg.y(q)) t.coords.emplace_back(q, psi, yk);
        testers.push_back(std::move(t));
    }

    u64 axis = 0;
    if (grid) {
        axis = static_cast<u64>(std::floor(std::pow(static_cast<double>(samples), 1.0 / cfg.m) + 1e-9));
        samples = 1;
        for (unsigned k = 0; k < cfg.m; ++k) samples *= axis;
    }
    auto coordinate = [&](u64 i, unsigned k) -> u64 {
        if (!grid) return detail::sample_bits(cfg.seed, i, k);
        u64 idx = i;
        for (unsigned j = 0; j < k; ++j) idx /= axis;
        idx %= axis;
        // Cell midpoints, offset by a seed-dependent fraction of a cell.
        const long double offset = static_cast<long double>(detail::sample_bits(cfg.seed, 0, k)) / 9007199254740992.0L;
        return static_cast<u64>((static_cast<long double>(idx) + offset) / axis * 9007199254740992.0L);
    };

    const unsigned workers = std::max(cfg.workers, 1u);
    std::vector<u64> hits(workers, 0);
    run_workers(workers, [&](unsigned w) {
        std::vector<u64> x(cfg.m);
        for (u64 i = w; i < samples; i += workers) {
            for (unsigned k = 0; k < cfg.m; ++k) x[k] = coordinate(i, k);
            for (const auto& t : testers) {
                bool all = true;
                for (unsigned k = 0; k < cfg.m && all; ++k) all = t.coords[k](x[k]);
                if (all) {
                    ++hits[w];
                    break;
                }
            }
        }
    });

    McEstimate est;
    for (u64 h : hits) est.hits += h;
    est.samples = samples;
    est.seed = cfg.seed;
    est.m = cfg.m;
    est.grid = grid;
    est.estimate = static_cast<double>(est.hits) / static_cast<double>(samples);
    std::tie(est.wilson95_lo, est.wilson95_hi) = detail::wilson(est.hits, samples, 1.96);
    std::tie(est.sigma3_lo, est.sigma3_hi) = detail::wilson(est.hits, samples, 3.0);
    return est;
}

/// Exact lambda_m of the union over q in [q_lo, q_hi] of A_q^{y_q}, for the
/// cases the library can compute exactly: m = 1 (any range) or a single q.
inline Rational union_measure_exact(const ExperimentConfig& cfg, u64 q_lo, u64 q_hi)
{
    if (cfg.m == 1) {
        TorusIntervalSet u;
        for (u64 q = q_lo; q <= q_hi; ++q) u = set_union(u, build_Aq(q, cfg.psi(q), cfg.y(q)[0]));
        return u.measure();
    }
    IDSC_REQUIRE(q_lo == q_hi, "exact union measure for m > 1 needs a single q");
    return product_measure(q_lo, cfg.psi(q_lo), cfg.y, cfg.m);
}

// ---------------------------------------------------------------------------
// Equidistribution

struct Window {
    Rational lo;
    Rational hi;
};

struct EquidistributionRow {
    u64 q;
    std::size_t window;
    Rational ratio;
    Rational deviation; // |ratio - (hi - lo)|
};

struct EquidistributionTable {
    std::vector<EquidistributionRow> rows;
    std::vector<Rational> max_deviation; // per window
    std::vector<u64> argmax;             // per window
};

/// Uses the first target coordinate; q with psi(q) = 0 are skipped.
inline EquidistributionTable equidistribution_scan(const ExperimentConfig& cfg, u64 q_lo, u64 q_hi,
                                                   const std::vector<Window>& windows)
{
    IDSC_REQUIRE(!windows.empty(), "equidistribution_scan: need at least one window");
    for (const auto& w : windows)
        IDSC_REQUIRE(w.lo >= 0 && w.lo < w.hi && w.hi <= 1, "equidistribution_scan: windows need 0 <= lo < hi <= 1");
    IDSC_REQUIRE(q_lo >= 1 && q_lo <= q_hi, "equidistribution_scan: need 1 <= q_lo <= q_hi");
    EquidistributionTable out;
    out.max_deviation.assign(windows.size(), 0);
    out.argmax.assign(windows.size(), 0);
    std::vector<std::vector<EquidistributionRow>> per_q(q_hi - q_lo + 1);
    run_workers(std::max(cfg.workers, 1u), [&](unsigned w) {
        for (u64 q = q_lo + w; q <= q_hi; q += std::max(cfg.workers, 1u)) {
            const Rational psi = cfg.psi(q);
            if (psi == 0) continue;
            const TorusIntervalSet a = build_Aq(q, psi, cfg.y(q)[0]);
            const Rational total = a.measure();
            for (std::size_t i = 0; i < windows.size(); ++i) {
                Rational ratio = restrict(a, windows[i].lo, windows[i].hi).measure() / total;
                Rational dev = abs(ratio - (windows[i].hi - windows[i].lo));
                per_q[q - q_lo].push_back({q, i, std::move(ratio), std::move(dev)});
            }
        }
    });
    for (auto& rows : per_q)
        for (auto& row : rows) {
            if (row.deviation > out.max_deviation[row.window] || out.argmax[row.window] == 0) {
                out.max_deviation[row.window] = row.deviation;
                out.argmax[row.window] = row.q;
            }
            out.rows.push_back(std::move(row));
        }
    return out;
}

} // namespace idsc
