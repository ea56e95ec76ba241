#pragma once

// The coprime approximation sets
//     A_q^y = union over gcd(a,q)=1 of [(a+y)/q - psi/q, (a+y)/q + psi/q) mod 1,
// reduced-residue point sets, approximation functions psi and target
// sequences y.

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "idsc/arith.hpp"
#include "idsc/errors.hpp"
#include "idsc/rational.hpp"
#include "idsc/torus.hpp"

namespace idsc {

// ---------------------------------------------------------------------------
// Reduced residues

struct ReducedResidues {
    u64 q;
    std::vector<Rational> points; // a/q, gcd(a,q)=1, 0 <= a < q, increasing
};

inline ReducedResidues reduced_fractions(u64 q)
{
    IDSC_REQUIRE(q >= 1, "reduced_fractions: q must be >= 1");
    ReducedResidues out{q, {}};
    const Natural den = to_natural(q);
    for (u64 a = 0; a < q; ++a)
        if (gcd_u64(a, q) == 1) out.points.push_back(make_rational(to_natural(a), den));
    return out;
}

/// The mod-1 sumset Q'_r + Q'_s as sorted distinct points.
inline std::vector<Rational> sumset_reduced(u64 r, u64 s)
{
    IDSC_REQUIRE(r >= 1 && s >= 1, "sumset_reduced: r, s must be >= 1");
    IDSC_REQUIRE(gcd_u64(r, s) == 1, "sumset_reduced: r and s must be coprime");
    // a/r + b/s = (a s + b r) / (r s); work with numerators mod r s.
    const u64 rs = r * s;
    std::vector<u64> numerators;
    for (u64 a = 0; a < r; ++a) {
        if (gcd_u64(a, r) != 1) continue;
        for (u64 b = 0; b < s; ++b) {
            if (gcd_u64(b, s) != 1) continue;
            numerators.push_back(static_cast<u64>((static_cast<u128>(a) * s + static_cast<u128>(b) * r) % rs));
        }
    }
    std::sort(numerators.begin(), numerators.end());
    numerators.erase(std::unique(numerators.begin(), numerators.end()), numerators.end());
    std::vector<Rational> out;
    out.reserve(numerators.size());
    const Natural den = to_natural(rs);
    for (u64 c : numerators) out.push_back(make_rational(to_natural(c), den));
    return out;
}

// ---------------------------------------------------------------------------
// A_q^y

inline TorusIntervalSet build_Aq(u64 q, const Rational& psi, const Rational& y)
{
    IDSC_REQUIRE(q >= 1, "build_Aq: q must be >= 1");
    IDSC_REQUIRE(psi >= 0, "build_Aq: psi must be >= 0");
    if (psi == 0) return {};
    {
        // Integer path: every endpoint is a multiple of 1/N.
        const Rational shift = y - psi;
        Natural N;
        mpz_lcm(N.get_mpz_t(), shift.get_den_mpz_t(), psi.get_den_mpz_t());
        N *= to_natural(q);
        if (N < Natural(1) << 62) {
            const i64 n = N.get_si();
            const i64 step = n / static_cast<i64>(q);
            const Natural w_nat = 2 * psi.get_num() * (N / (to_natural(q) * psi.get_den()));
            if (w_nat >= N) return TorusIntervalSet::full();
            const i64 w = w_nat.get_si();
            // shift * N / q, reduced mod N.
            Natural s_nat = shift.get_num() * (N / (to_natural(q) * shift.get_den()));
            mpz_fdiv_r(s_nat.get_mpz_t(), s_nat.get_mpz_t(), N.get_mpz_t());
            const i64 s0 = s_nat.get_si();
            std::vector<std::pair<i64, i64>> pieces;
            pieces.reserve(q + 1);
            for (u64 a = 0; a < q; ++a) {
                if (gcd_u64(a, q) != 1) continue;
                const i64 lo = static_cast<i64>((static_cast<i128>(a) * step + s0) % n);
                if (lo + w <= n) {
                    pieces.emplace_back(lo, lo + w);
                } else {
                    pieces.emplace_back(lo, n);
                    pieces.emplace_back(0, lo + w - n);
                }
            }
            return TorusIntervalSet::from_scaled(std::move(pieces), n);
        }
    }
    const Rational qq(to_natural(q));
    const Rational lo0 = (y - psi) / qq;
    const Rational width = 2 * psi / qq;
    std::vector<Interval> raw;
    raw.reserve(q);
    for (u64 a = 0; a < q; ++a) {
        if (gcd_u64(a, q) != 1) continue;
        Rational lo = lo0 + make_rational(to_natural(a), to_natural(q));
        Rational hi = lo + width;
        raw.push_back({std::move(lo), std::move(hi)});
    }
    return TorusIntervalSet::from_raw(raw);
}

inline Rational measure_Aq(u64 q, const Rational& psi, const Rational& y) { return build_Aq(q, psi, y).measure(); }

/// The closed form 2 phi(q) psi / q: exact when psi <= 1/2, an upper bound
/// (capped at 1) always.
struct MeasureCheck {
    Rational measure;
    Rational closed_form;
    bool equality_expected;
    bool ok;
};

inline MeasureCheck closed_form_check(u64 q, const Rational& psi, const Rational& y)
{
    MeasureCheck c;
    c.measure = measure_Aq(q, psi, y);
    c.closed_form = 2 * Rational(to_natural(totient(q))) * psi / Rational(to_natural(q));
    c.equality_expected = psi <= Rational(1, 2);
    c.ok = c.equality_expected ? c.measure == c.closed_form : c.measure <= rmin(Rational(1), c.closed_form);
    return c;
}

/// lambda_m of a product set from its per-coordinate 1-d measures.
inline Rational product_measure(const std::vector<Rational>& coordinate_measures)
{
    IDSC_REQUIRE(!coordinate_measures.empty(), "product_measure: need at least one coordinate");
    Rational out = 1;
    for (const auto& m : coordinate_measures) out *= m;
    return out;
}

/// All m coordinates share one 1-d measure.
inline Rational product_measure(const Rational& measure_1d, unsigned m)
{
    IDSC_REQUIRE(m >= 1, "product_measure: m must be >= 1");
    return rpow(measure_1d, m);
}

inline Rational equidistribution_ratio(u64 q, const Rational& psi, const Rational& y, const Rational& lo,
                                       const Rational& hi)
{
    const TorusIntervalSet a = build_Aq(q, psi, y);
    if (a.empty()) throw usage_error("equidistribution_ratio: A_q is empty, ratio undefined");
    return restrict(a, lo, hi).measure() / a.measure();
}

/// Exists a with gcd(a,q)=1 and |q x - a - y| < psi (strict). Integers a in
/// the open window around q x - y are scanned; coprimality is q-periodic, so
/// at most q+1 of them need checking.
inline bool hit_test(const Rational& x, u64 q, const Rational& psi, const Rational& y)
{
    IDSC_REQUIRE(q >= 1, "hit_test: q must be >= 1");
    if (psi <= 0) return false;
    const Rational t = Rational(to_natural(q)) * x - y;
    Natural a = floor_of(t - psi) + 1;
    const Natural last = ceil_of(t + psi) - 1;
    for (u64 steps = 0; a <= last && steps <= q; ++a, ++steps) {
        Natural r;
        mpz_fdiv_r_ui(r.get_mpz_t(), a.get_mpz_t(), q);
        if (gcd_u64(r.get_ui(), q) == 1) return true;
    }
    return false;
}

/// Double samples are exact dyadic rationals.
inline bool hit_test(double x, u64 q, const Rational& psi, const Rational& y)
{
    IDSC_REQUIRE(std::isfinite(x), "hit_test: sample must be finite");
    return hit_test(Rational(x), q, psi, y);
}

/// hit_test specialised to samples x = k / 2^53 with 128-bit integer
/// arithmetic; falls back to the Rational path when the parameters are too
/// large for that.
class DyadicHitTester {
public:
    static constexpr int kSampleBits = 53;

    DyadicHitTester(u64 q, const Rational& psi, const Rational& y) : q_(q), psi_(psi), y_(y)
    {
        IDSC_REQUIRE(q >= 1, "hit_test: q must be >= 1");
        if (psi <= 0) {
            never_ = true;
            return;
        }
        const bool small = q < (u64{1} << 20) && mpz_sizeinbase(y.get_den_mpz_t(), 2) <= 24 &&
                           mpz_sizeinbase(psi.get_den_mpz_t(), 2) <= 24 &&
                           mpz_sizeinbase(psi.get_num_mpz_t(), 2) <= 24 &&
                           mpz_sizeinbase(y.get_num_mpz_t(), 2) <= 30;
        if (!small) return;
        fast_ = true;
        yn_ = y.get_num().get_si();
        yd_ = y.get_den().get_si();
        pn_ = psi.get_num().get_si();
        pd_ = psi.get_den().get_si();
    }

    bool operator()(u64 k) const
    {
        if (never_) return false;
        if (!fast_) {
            const Rational x = make_rational(to_natural(k), Natural(1) << kSampleBits);
            return hit_test(x, q_, psi_, y_);
        }
        // t = q x - y = T / S with S = 2^53 * yd.
        const i128 S = (i128{1} << kSampleBits) * yd_;
        const i128 T = static_cast<i128>(q_) * static_cast<i128>(k) * yd_ - static_cast<i128>(yn_) * (i128{1} << kSampleBits);
        // |T - a S| * pd < pn * S  <=>  a in (t - psi, t + psi)
        i128 a = floor_div(T, S);
        const i128 bound = static_cast<i128>(pn_) * S;
        // Walk outward from floor(t) until the window is left on both sides.
        for (int dir : {0, 1}) {
            for (i128 b = dir == 0 ? a : a + 1;; b += dir == 0 ? -1 : 1) {
                i128 diff = T - b * S;
                if (diff < 0) diff = -diff;
                if (diff * pd_ >= bound) break;
                i128 rem = b % static_cast<i128>(q_);
                if (rem < 0) rem += q_;
                if (gcd_u64(static_cast<u64>(rem), q_) == 1) return true;
                if ((dir == 0 ? a - b : b - a) > static_cast<i128>(q_)) break;
            }
        }
        return false;
    }

private:
    static i128 floor_div(i128 a, i128 b)
    {
        i128 d = a / b;
        if ((a % b != 0) && ((a < 0) != (b < 0))) --d;
        return d;
    }

    u64 q_;
    Rational psi_, y_;
    bool never_ = false;
    bool fast_ = false;
    i64 yn_ = 0, yd_ = 1, pn_ = 0, pd_ = 1;
};

// ---------------------------------------------------------------------------
// Approximation functions

namespace detail {

/// ceil(n^(1/k)) for n >= 1.
inline Natural ceil_root(const Natural& n, unsigned long k)
{
    Natural r;
    int exact = mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
    if (!exact) r += 1;
    return r;
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(std::string s)
{
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.back())) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && ws(s[i])) ++i;
    return s.substr(i);
}

/// CSV rows "q,v1,v2,...". Lines starting with '#' and a non-numeric header
/// line are skipped.
inline std::map<u64, std::vector<Rational>> read_table(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open table '" + path + "'");
    std::map<u64, std::vector<Rational>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line, ',');
        if (lineno == 1 && !cells.empty() && !cells[0].empty() && !std::isdigit(static_cast<unsigned char>(cells[0][0])))
            continue;
        if (cells.size() < 2) throw usage_error(path + ":" + std::to_string(lineno) + ": expected q,value");
        u64 q = to_u64(parse_natural(trim(cells[0])));
        std::vector<Rational> vals;
        for (std::size_t i = 1; i < cells.size(); ++i) vals.push_back(parse_rational(trim(cells[i])));
        rows[q] = std::move(vals);
    }
    return rows;
}

inline u64 splitmix64(u64 x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// q -> psi(q) >= 0, exact. Queries beyond support_cap (when nonzero) are 0.
class ApproxFunction {
public:
    struct Constant {
        Rational c;
    };
    /// c * q^-alpha; non-integer alpha = u/v uses c / ceil((q^u)^(1/v)).
    struct Power {
        Rational c;
        Rational alpha;
        bool clip;
    };
    struct Table {
        std::map<u64, Rational> values;
    };
    /// min(1/2, q / (phi(q) ceil(q^(1/m)))): (phi psi / q)^m ~ 1/q diverges.
    struct Divergent {
        unsigned m;
    };
    struct Custom {
        std::function<Rational(u64)> fn;
        std::string label;
    };

    static ApproxFunction constant(Rational c)
    {
        IDSC_REQUIRE(c >= 0, "psi constant must be >= 0");
        return ApproxFunction(Constant{std::move(c)});
    }
    static ApproxFunction power(Rational c, Rational alpha, bool clip = true)
    {
        IDSC_REQUIRE(c >= 0 && alpha >= 0, "psi power family needs c >= 0 and alpha >= 0");
        return ApproxFunction(Power{std::move(c), std::move(alpha), clip});
    }
    static ApproxFunction table(std::map<u64, Rational> values)
    {
        for (const auto& [q, v] : values) IDSC_REQUIRE(v >= 0, "psi table values must be >= 0");
        return ApproxFunction(Table{std::move(values)});
    }
    static ApproxFunction divergent(unsigned m)
    {
        IDSC_REQUIRE(m >= 1, "divergent family needs m >= 1");
        return ApproxFunction(Divergent{m});
    }
    static ApproxFunction custom(std::function<Rational(u64)> fn, std::string label)
    {
        return ApproxFunction(Custom{std::move(fn), std::move(label)});
    }

    /// "const:1/4", "pow:1/2,1" (c, alpha; append ",noclip" to disable the
    /// 1/2 clip), "div:3", "table:<csv path>". Counterexample specs ("cx:")
    /// are resolved by parse_psi in specs.hpp.
    static ApproxFunction parse(std::string_view spec)
    {
        const auto colon = spec.find(':');
        const std::string kind(spec.substr(0, colon));
        const std::string arg = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
        if (kind == "const") return constant(parse_rational(arg));
        if (kind == "pow") {
            auto parts = detail::split(arg, ',');
            IDSC_REQUIRE(parts.size() == 2 || (parts.size() == 3 && parts[2] == "noclip"),
                         "psi spec pow:<c>,<alpha>[,noclip]");
            return power(parse_rational(parts[0]), parse_rational(parts[1]), parts.size() == 2);
        }
        if (kind == "div") return divergent(static_cast<unsigned>(to_u64(parse_natural(arg))));
        if (kind == "table") {
            std::map<u64, Rational> values;
            for (auto& [q, row] : detail::read_table(arg)) {
                IDSC_REQUIRE(row.size() == 1, "psi table rows must be q,value");
                values[q] = row[0];
            }
            auto f = table(std::move(values));
            f.spec_ = std::string(spec);
            return f;
        }
        throw usage_error("unknown psi spec '" + std::string(spec) + "'");
    }

    Rational operator()(u64 q) const
    {
        if (q == 0 || (support_cap_ != 0 && q > support_cap_)) return 0;
        return std::visit([q](const auto& k) { return eval(k, q); }, kind_);
    }

    ApproxFunction with_support_cap(u64 cap) const
    {
        ApproxFunction f = *this;
        f.support_cap_ = cap;
        return f;
    }
    u64 support_cap() const { return support_cap_; }

    std::string spec() const
    {
        std::string s = spec_.empty() ? std::visit([](const auto& k) { return describe(k); }, kind_) : spec_;
        if (support_cap_ != 0) s += "@" + std::to_string(support_cap_);
        return s;
    }

private:
    using Kind = std::variant<Constant, Power, Table, Divergent, Custom>;
    explicit ApproxFunction(Kind k) : kind_(std::move(k)) {}

    static Rational eval(const Constant& k, u64) { return k.c; }
    static Rational eval(const Power& k, u64 q)
    {
        Rational v;
        const Natural nq = to_natural(q);
        if (k.alpha.get_den() == 1) {
            Natural p;
            mpz_pow_ui(p.get_mpz_t(), nq.get_mpz_t(), k.alpha.get_num().get_ui());
            v = k.c / Rational(p);
        } else {
            Natural base;
            mpz_pow_ui(base.get_mpz_t(), nq.get_mpz_t(), k.alpha.get_num().get_ui());
            v = k.c / Rational(detail::ceil_root(base, k.alpha.get_den().get_ui()));
        }
        return k.clip ? rmin(v, Rational(1, 2)) : v;
    }
    static Rational eval(const Table& k, u64 q)
    {
        auto it = k.values.find(q);
        return it == k.values.end() ? Rational(0) : it->second;
    }
    static Rational eval(const Divergent& k, u64 q)
    {
        const Natural nq = to_natural(q);
        Rational v = make_rational(nq, to_natural(totient(q)) * detail::ceil_root(nq, k.m));
        v.canonicalize();
        return rmin(v, Rational(1, 2));
    }
    static Rational eval(const Custom& k, u64 q) { return k.fn(q); }

    static std::string describe(const Constant& k) { return "const:" + to_string(k.c); }
    static std::string describe(const Power& k)
    {
        return "pow:" + to_string(k.c) + "," + to_string(k.alpha) + (k.clip ? "" : ",noclip");
    }
    static std::string describe(const Table& k) { return "table:<" + std::to_string(k.values.size()) + " rows>"; }
    static std::string describe(const Divergent& k) { return "div:" + std::to_string(k.m); }
    static std::string describe(const Custom& k) { return k.label; }

    Kind kind_;
    u64 support_cap_ = 0;
    std::string spec_;
};

// ---------------------------------------------------------------------------
// Target sequences

/// q -> y_q in Q^m, exact.
class TargetSequence {
public:
    static TargetSequence zero(unsigned m)
    {
        IDSC_REQUIRE(m >= 1, "target dimension must be >= 1");
        TargetSequence t(m);
        t.fn_ = [m](u64) { return std::vector<Rational>(m, Rational(0)); };
        t.spec_ = "zero";
        return t;
    }

    static TargetSequence constant(std::vector<Rational> y)
    {
        IDSC_REQUIRE(!y.empty(), "constant target needs at least one component");
        TargetSequence t(static_cast<unsigned>(y.size()));
        t.spec_ = "const:";
        for (std::size_t i = 0; i < y.size(); ++i) t.spec_ += (i ? "," : "") + to_string(y[i]);
        t.fn_ = [y = std::move(y)](u64) { return y; };
        return t;
    }

    /// Rows missing from the table are the zero vector.
    static TargetSequence table(std::map<u64, std::vector<Rational>> rows, unsigned m)
    {
        for (const auto& [q, v] : rows)
            IDSC_REQUIRE(v.size() == m, "target table row for q=" + std::to_string(q) + " has wrong dimension");
        TargetSequence t(m);
        t.fn_ = [rows = std::move(rows), m](u64 q) {
            auto it = rows.find(q);
            return it == rows.end() ? std::vector<Rational>(m, Rational(0)) : it->second;
        };
        t.spec_ = "table";
        return t;
    }

    /// Deterministic pseudo-random moving target: component k of y_q is
    /// (h(seed, q, k) mod den) / den.
    static TargetSequence hashed(u64 seed, u64 den, unsigned m)
    {
        IDSC_REQUIRE(den >= 1 && m >= 1, "rnd target needs den >= 1 and m >= 1");
        TargetSequence t(m);
        t.fn_ = [seed, den, m](u64 q) {
            std::vector<Rational> y;
            y.reserve(m);
            for (unsigned k = 0; k < m; ++k) {
                u64 h = detail::splitmix64(detail::splitmix64(seed ^ (q * 0xD1B54A32D192ED03ULL)) + k);
                y.push_back(make_rational(to_natural(h % den), to_natural(den)));
            }
            return y;
        };
        t.spec_ = "rnd:" + std::to_string(seed) + "," + std::to_string(den);
        return t;
    }

    static TargetSequence custom(std::function<std::vector<Rational>(u64)> fn, unsigned m, std::string label)
    {
        TargetSequence t(m);
        t.fn_ = std::move(fn);
        t.spec_ = std::move(label);
        return t;
    }

    /// "zero", "const:a[,b,...]", "rnd:<seed>,<den>", "table:<csv path>" with
    /// rows q,y1,...,ym. A single constant component is broadcast to m
    /// coordinates; any other dimension mismatch is rejected.
    static TargetSequence parse(std::string_view spec, unsigned m)
    {
        const auto colon = spec.find(':');
        const std::string kind(spec.substr(0, colon));
        const std::string arg = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
        if (kind == "zero") return zero(m);
        if (kind == "const") {
            std::vector<Rational> y;
            for (const auto& part : detail::split(arg, ',')) y.push_back(parse_rational(detail::trim(part)));
            if (y.size() == 1 && m > 1) y.assign(m, y[0]);
            IDSC_REQUIRE(y.size() == m, "target dimension " + std::to_string(y.size()) + " does not match m=" +
                                            std::to_string(m));
            return constant(std::move(y));
        }
        if (kind == "rnd") {
            auto parts = detail::split(arg, ',');
            IDSC_REQUIRE(parts.size() == 2, "target spec rnd:<seed>,<den>");
            return hashed(to_u64(parse_natural(parts[0])), to_u64(parse_natural(parts[1])), m);
        }
        if (kind == "table") {
            auto t = table(detail::read_table(arg), m);
            t.spec_ = std::string(spec);
            return t;
        }
        throw usage_error("unknown target spec '" + std::string(spec) + "'");
    }

    unsigned dimension() const { return m_; }
    std::vector<Rational> operator()(u64 q) const
    {
        auto y = fn_(q);
        IDSC_ENSURE(y.size() == m_, "target sequence returned wrong dimension");
        return y;
    }
    const std::string& spec() const { return spec_; }

private:
    explicit TargetSequence(unsigned m) : m_(m) {}

    unsigned m_;
    std::function<std::vector<Rational>(u64)> fn_;
    std::string spec_;
};

/// Product of the per-coordinate measures of A_q^{y_q}; the target's
/// dimension must equal m.
inline Rational product_measure(u64 q, const Rational& psi, const TargetSequence& y, unsigned m)
{
    IDSC_REQUIRE(y.dimension() == m, "product_measure: target dimension " + std::to_string(y.dimension()) +
                                         " does not match m=" + std::to_string(m));
    std::vector<Rational> coords;
    for (const auto& yk : y(q)) coords.push_back(measure_Aq(q, psi, yk));
    return product_measure(coords);
}

} // namespace idsc
