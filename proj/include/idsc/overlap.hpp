#pragma once

// Pair machinery for lambda(A_q ∩ A_r): the prime-power splitting of (q, r),
// the coprime pair count f(c) (closed form and brute force), the window
// geometry, the right-hand sides of the overlap bounds, and exact sifted
// counts of integers in an interval.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "idsc/approx.hpp"
#include "idsc/arith.hpp"
#include "idsc/errors.hpp"
#include "idsc/rational.hpp"
#include "idsc/torus.hpp"

namespace idsc {

/// Selects the indicator convention of the main term: D > 1 (strict) or
/// D >= 1 (inclusive).
enum class Indicator { strict, inclusive };

struct PrimeValuations {
    u64 prime;
    unsigned u; // v_p(q)
    unsigned v; // v_p(r)
};

/// q and r split prime by prime: ell collects p^u where u == v, em collects
/// p^min(u,v) and en p^max(u,v) where u != v.
struct PairDecomposition {
    u64 q, r;
    u64 gcd, lcm;
    u64 ell, em, en;
    std::vector<PrimeValuations> valuations;

    /// Primes dividing qr/gcd^2, i.e. those with u != v.
    std::vector<u64> unbalanced_primes() const
    {
        std::vector<u64> out;
        for (const auto& pv : valuations)
            if (pv.u != pv.v) out.push_back(pv.prime);
        return out;
    }
    std::vector<u64> ell_primes() const
    {
        std::vector<u64> out;
        for (const auto& pv : valuations)
            if (pv.u == pv.v) out.push_back(pv.prime);
        return out;
    }
};

inline PairDecomposition decompose_pair(u64 q, u64 r)
{
    IDSC_REQUIRE(q >= 1 && r >= 1, "decompose_pair: q, r must be >= 1");
    PairDecomposition d{q, r, gcd_u64(q, r), lcm_u64(q, r), 1, 1, 1, {}};
    const Factorization fq = factorize(q), fr = factorize(r);
    std::size_t i = 0, j = 0;
    while (i < fq.size() || j < fr.size()) {
        PrimeValuations pv{};
        if (j == fr.size() || (i < fq.size() && fq[i].prime < fr[j].prime)) {
            pv = {fq[i].prime, fq[i].exponent, 0};
            ++i;
        } else if (i == fq.size() || fr[j].prime < fq[i].prime) {
            pv = {fr[j].prime, 0, fr[j].exponent};
            ++j;
        } else {
            pv = {fq[i].prime, fq[i].exponent, fr[j].exponent};
            ++i;
            ++j;
        }
        auto ipow = [](u64 p, unsigned e) {
            u64 v = 1;
            while (e--) v *= p;
            return v;
        };
        if (pv.u == pv.v) {
            d.ell *= ipow(pv.prime, pv.u);
        } else {
            d.em *= ipow(pv.prime, std::min(pv.u, pv.v));
            d.en *= ipow(pv.prime, std::max(pv.u, pv.v));
        }
        d.valuations.push_back(pv);
    }

    IDSC_ENSURE(d.gcd == d.ell * d.em, "decompose_pair: gcd != ell*m");
    IDSC_ENSURE(d.lcm == d.ell * d.en, "decompose_pair: lcm != ell*n");
    IDSC_ENSURE(d.en % d.em == 0, "decompose_pair: m does not divide n");
    IDSC_ENSURE(gcd_u64(d.ell, d.em * d.en) == 1, "decompose_pair: ell not coprime to m*n");
    IDSC_ENSURE(static_cast<u128>(q) * r / (static_cast<u128>(d.gcd) * d.gcd) == d.en / d.em,
                "decompose_pair: qr/gcd^2 != n/m");
    const u64 phi_m = totient(d.em), phi_l = totient(d.ell);
    IDSC_ENSURE(phi_m * phi_l == totient(d.gcd), "decompose_pair: phi(m)phi(ell) != phi(gcd)");
    IDSC_ENSURE(static_cast<u128>(phi_m) * phi_l * phi_l * totient(d.en) ==
                    static_cast<u128>(totient(q)) * totient(r),
                "decompose_pair: phi(m)phi(ell)^2phi(n) != phi(q)phi(r)");
    return d;
}

namespace detail {
inline u64 mod_u64(i64 c, u64 n) { return static_cast<u64>(((c % static_cast<i64>(n)) + static_cast<i64>(n)) % static_cast<i64>(n)); }
} // namespace detail

/// f(c) = 1[(c,n)=1] phi(m) ell prod_{p|(ell,c)} (1-1/p) prod_{p|ell, p∤c} (1-2/p).
inline u64 coprime_pair_count_formula(const PairDecomposition& d, i64 c)
{
    if (gcd_u64(detail::mod_u64(c, d.en), d.en) != 1) return 0;
    Rational value = Rational(to_natural(totient(d.em))) * Rational(to_natural(d.ell));
    for (u64 p : d.ell_primes()) {
        if (detail::mod_u64(c, p) == 0)
            value *= make_rational(to_natural(p - 1), to_natural(p));
        else
            value *= make_rational(to_natural(p - 2), to_natural(p));
    }
    IDSC_ENSURE(value.get_den() == 1, "coprime pair count is not an integer");
    return to_u64(value.get_num());
}

/// f(c) for every residue c mod lcm(q,r), by brute force over reduced pairs.
inline std::vector<u64> coprime_pair_count_table(u64 q, u64 r)
{
    IDSC_REQUIRE(q >= 1 && r >= 1, "coprime_pair_count: q, r must be >= 1");
    const u64 L = lcm_u64(q, r), sq = L / q, sr = L / r;
    std::vector<u64> counts(L, 0);
    for (u64 a = 0; a < q; ++a) {
        if (gcd_u64(a, q) != 1) continue;
        for (u64 b = 0; b < r; ++b) {
            if (gcd_u64(b, r) != 1) continue;
            // a/q - b/r = (a sq - b sr) / L
            counts[(a * sq + L - (b * sr) % L) % L] += 1;
        }
    }
    return counts;
}

/// #{(a,b) in Z_q* x Z_r* : a/q - b/r = c/lcm(q,r) mod 1}.
inline u64 coprime_pair_count_oracle(u64 q, u64 r, i64 c)
{
    IDSC_REQUIRE(q >= 1 && r >= 1, "coprime_pair_count: q, r must be >= 1");
    const u64 L = lcm_u64(q, r), sq = L / q, sr = L / r, target = detail::mod_u64(c, L);
    u64 count = 0;
    for (u64 a = 0; a < q; ++a) {
        if (gcd_u64(a, q) != 1) continue;
        for (u64 b = 0; b < r; ++b) {
            if (gcd_u64(b, r) != 1) continue;
            if ((a * sq + L - (b * sr) % L) % L == target) ++count;
        }
    }
    return count;
}

// ---------------------------------------------------------------------------

struct OverlapGeometry {
    Rational delta;   // 2 min(psi_q/q, psi_r/r)
    Rational Delta;   // 2 max(psi_q/q, psi_r/r)
    Rational D;       // lcm(q,r) * Delta
    Rational X, Y;    // [-D/2, D/2] + (r/g) y_q - (q/g) y_r
    u64 t;            // max(g(q/gcd), g(r/gcd))
    bool degenerate;  // psi_q == psi_r == 0
};

inline OverlapGeometry overlap_geometry(const PairDecomposition& d, const Rational& psi_q, const Rational& psi_r,
                                        const Rational& y_q, const Rational& y_r)
{
    IDSC_REQUIRE(psi_q >= 0 && psi_r >= 0, "overlap_geometry: psi must be >= 0");
    const Rational wq = psi_q / Rational(to_natural(d.q));
    const Rational wr = psi_r / Rational(to_natural(d.r));
    OverlapGeometry g;
    g.delta = 2 * rmin(wq, wr);
    g.Delta = 2 * rmax(wq, wr);
    g.D = Rational(to_natural(d.lcm)) * g.Delta;
    const Rational centre =
        Rational(to_natural(d.r / d.gcd)) * y_q - Rational(to_natural(d.q / d.gcd)) * y_r;
    g.X = centre - g.D / 2;
    g.Y = centre + g.D / 2;
    g.t = std::max(g_of(d.q / d.gcd), g_of(d.r / d.gcd));
    g.degenerate = psi_q == 0 && psi_r == 0;
    IDSC_ENSURE(g.Y - g.X == g.D, "window length differs from D");
    IDSC_ENSURE(Rational(to_natural(d.em * d.ell)) * g.D * g.delta == 4 * psi_q * psi_r,
                "m*ell*D*delta != 4 psi(q) psi(r)");
    return g;
}

/// The integers c whose pairs (a, b) can produce an overlap:
/// |(a+y_q)/q - (b+y_r)/r| < Delta  <=>  |c + (r/g)y_q - (q/g)y_r| < D.
/// Returned as the closed range [X', Y'] = -centre + [-D, D].
inline std::pair<Rational, Rational> covering_window(const OverlapGeometry& g)
{
    const Rational centre = (g.X + g.Y) / 2;
    return {-centre - g.D, -centre + g.D};
}

/// sum of f(c) over integers c in [lo, hi].
inline Natural window_pair_count(const PairDecomposition& d, const Rational& lo, const Rational& hi)
{
    Natural total = 0;
    for (Natural c = ceil_of(lo); Rational(c) <= hi; ++c) total += to_natural(coprime_pair_count_formula(d, c.get_si()));
    return total;
}

inline Rational pair_overlap_exact(u64 q, u64 r, const Rational& psi_q, const Rational& psi_r, const Rational& y_q,
                                   const Rational& y_r)
{
    if (psi_q == 0 || psi_r == 0) return 0;
    return intersect(build_Aq(q, psi_q, y_q), build_Aq(r, psi_r, y_r)).measure();
}

// ---------------------------------------------------------------------------

struct OverlapBound {
    Rational main;  // indicator * (psi_q phi(q)/q)(psi_r phi(r)/r) * prod_{p | qr/g^2, p > D} (1 + 1/p)
    Rational error; // phi(gcd) * min(psi_q/q, psi_r/r)
    Rational total() const { return main + error; }
};

inline Rational prime_boost(const PairDecomposition& d, const Rational& D)
{
    Rational out = 1;
    for (u64 p : d.unbalanced_primes())
        if (Rational(to_natural(p)) > D) out *= Rational(to_natural(p + 1), to_natural(p));
    return out;
}

inline bool indicator_holds(const Rational& D, Indicator ind) { return ind == Indicator::strict ? D > 1 : D >= 1; }

inline Rational M_term(const PairDecomposition& d, const Rational& psi_q, const Rational& psi_r,
                       const OverlapGeometry& g, Indicator ind = Indicator::inclusive)
{
    if (!indicator_holds(g.D, ind)) return 0;
    const Rational wq = psi_q * make_rational(to_natural(totient(d.q)), to_natural(d.q));
    const Rational wr = psi_r * make_rational(to_natural(totient(d.r)), to_natural(d.r));
    return wq * wr * prime_boost(d, g.D);
}

inline OverlapBound overlap_bound_rhs(const PairDecomposition& d, const Rational& psi_q, const Rational& psi_r,
                                      const OverlapGeometry& g, Indicator ind = Indicator::strict)
{
    OverlapBound b;
    b.main = M_term(d, psi_q, psi_r, g, ind);
    b.error = Rational(to_natural(totient(d.gcd))) * g.delta / 2;
    return b;
}

/// psi(q)psi(r) + (psi(q)/q) phi(gcd(q,r)) for r < q.
inline Rational trivial_overlap_bound(u64 q, u64 r, const Rational& psi_q, const Rational& psi_r)
{
    IDSC_REQUIRE(r >= 1 && r < q, "trivial_overlap_bound: need 1 <= r < q");
    return psi_q * psi_r + psi_q / Rational(to_natural(q)) * Rational(to_natural(totient(gcd_u64(q, r))));
}

/// Everything known about one pair.
struct OverlapReport {
    PairDecomposition decomposition;
    OverlapGeometry geometry;
    Rational exact_overlap;
    OverlapBound bound;
    Rational M;
    std::optional<Rational> trivial_rhs; // absent for q == r
};

inline OverlapReport overlap_report(u64 q, u64 r, const Rational& psi_q, const Rational& psi_r, const Rational& y_q,
                                    const Rational& y_r, Indicator m_indicator = Indicator::inclusive)
{
    OverlapReport rep{decompose_pair(q, r), {}, {}, {}, {}, std::nullopt};
    rep.geometry = overlap_geometry(rep.decomposition, psi_q, psi_r, y_q, y_r);
    rep.exact_overlap = pair_overlap_exact(q, r, psi_q, psi_r, y_q, y_r);
    rep.bound = overlap_bound_rhs(rep.decomposition, psi_q, psi_r, rep.geometry);
    rep.M = M_term(rep.decomposition, psi_q, psi_r, rep.geometry, m_indicator);
    if (q != r)
        rep.trivial_rhs = q > r ? trivial_overlap_bound(q, r, psi_q, psi_r) : trivial_overlap_bound(r, q, psi_r, psi_q);
    return rep;
}

// ---------------------------------------------------------------------------

struct SiftedCount {
    Natural count;
    Rational main_term; // (Y - X) phi(rad n) / rad n
    Rational error;     // |count - main_term|
    unsigned omega;
};

inline constexpr unsigned kDefaultOmegaCap = 20;

/// #{c in Z ∩ [X, Y] : gcd(c, n) = 1} by inclusion-exclusion over the
/// squarefree divisors of rad(n).
inline SiftedCount sifted_interval_count(const Rational& X, const Rational& Y, u64 n,
                                         unsigned omega_cap = kDefaultOmegaCap)
{
    IDSC_REQUIRE(X <= Y, "sifted_interval_count: need X <= Y");
    IDSC_REQUIRE(n >= 1, "sifted_interval_count: n must be >= 1");
    std::vector<u64> primes;
    for (auto pe : factorize(n)) primes.push_back(pe.prime);
    const unsigned omega = static_cast<unsigned>(primes.size());
    if (omega > omega_cap)
        throw budget_error("sifted_interval_count: omega(n)=" + std::to_string(omega) + " exceeds cap " +
                           std::to_string(omega_cap));

    SiftedCount out{0, 0, 0, omega};
    Rational density = 1;
    for (u64 p : primes) density *= make_rational(to_natural(p - 1), to_natural(p));
    for (u64 mask = 0; mask < (u64{1} << omega); ++mask) {
        Natural d = 1;
        for (unsigned i = 0; i < omega; ++i)
            if (mask >> i & 1) d *= to_natural(primes[i]);
        const Rational rd(d);
        Natural multiples = floor_of(Y / rd) - ceil_of(X / rd) + 1;
        if (multiples < 0) multiples = 0;
        if (__builtin_popcountll(mask) & 1)
            out.count -= multiples;
        else
            out.count += multiples;
    }
    out.main_term = (Y - X) * density;
    out.error = abs(Rational(out.count) - out.main_term);
    IDSC_ENSURE(out.error <= Rational(Natural(1) << omega), "sifted count error exceeds 2^omega");
    return out;
}

} // namespace idsc
