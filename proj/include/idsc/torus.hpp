#pragma once

// Finite unions of half-open rational intervals on the circle [0,1).
//
// Canonical form: pieces [lo, hi) with 0 <= lo < hi <= 1, sorted by lo,
// pairwise disjoint and separated by a gap (hi_i < lo_{i+1}). Every set
// operation returns canonical form, so structural equality is set equality.
// A point sitting exactly at 0 == 1 is represented by a piece starting at 0.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "idsc/errors.hpp"
#include "idsc/rational.hpp"

namespace idsc {

struct Interval {
    Rational lo;
    Rational hi;

    friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
};

class TorusIntervalSet {
public:
    TorusIntervalSet() = default;

    static TorusIntervalSet full() { return TorusIntervalSet(std::vector<Interval>{{Rational(0), Rational(1)}}); }

    /// Pieces may lie anywhere on the real line and wrap; they are reduced
    /// mod 1. Empty pieces (lo == hi) are dropped, reversed ones rejected.
    static TorusIntervalSet from_raw(const std::vector<Interval>& raw)
    {
        std::vector<Interval> pieces;
        pieces.reserve(raw.size() + 2);
        for (const auto& iv : raw) {
            if (iv.lo > iv.hi) throw usage_error("interval with lo > hi: [" + to_string(iv.lo) + ", " + to_string(iv.hi) + ")");
            if (iv.lo == iv.hi) continue;
            Rational len = iv.hi - iv.lo;
            if (len >= 1) return full();
            Rational lo = frac_of(iv.lo);
            Rational hi = lo + len;
            if (hi <= 1) {
                pieces.push_back({std::move(lo), std::move(hi)});
            } else {
                pieces.push_back({std::move(lo), Rational(1)});
                pieces.push_back({Rational(0), hi - 1});
            }
        }
        return from_pieces_in_unit(std::move(pieces));
    }

    /// Pieces [lo/den, hi/den) with 0 <= lo < hi <= den, in any order.
    static TorusIntervalSet from_scaled(std::vector<std::pair<i64, i64>> pieces, i64 den)
    {
        IDSC_REQUIRE(den >= 1, "from_scaled: denominator must be >= 1");
        std::sort(pieces.begin(), pieces.end());
        std::vector<std::pair<i64, i64>> merged;
        for (const auto& [lo, hi] : pieces) {
            IDSC_REQUIRE(0 <= lo && lo < hi && hi <= den, "from_scaled: piece outside [0, den]");
            if (!merged.empty() && lo <= merged.back().second)
                merged.back().second = std::max(merged.back().second, hi);
            else
                merged.emplace_back(lo, hi);
        }
        std::vector<Interval> out;
        out.reserve(merged.size());
        for (const auto& [lo, hi] : merged) out.push_back({make_rational(lo, den), make_rational(hi, den)});
        return TorusIntervalSet(std::move(out));
    }

    const std::vector<Interval>& intervals() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    std::size_t size() const { return pieces_.size(); }

    Rational measure() const
    {
        Rational m = 0;
        for (const auto& iv : pieces_) m += iv.hi - iv.lo;
        return m;
    }

    /// Half-open membership of x mod 1.
    bool contains(const Rational& x) const
    {
        Rational t = frac_of(x);
        auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                                   [](const Rational& v, const Interval& iv) { return v < iv.lo; });
        if (it == pieces_.begin()) return false;
        --it;
        return t < it->hi;
    }

    friend bool operator==(const TorusIntervalSet&, const TorusIntervalSet&) = default;

    friend TorusIntervalSet set_union(const TorusIntervalSet& a, const TorusIntervalSet& b)
    {
        std::vector<Interval> merged;
        merged.reserve(a.size() + b.size());
        std::merge(a.pieces_.begin(), a.pieces_.end(), b.pieces_.begin(), b.pieces_.end(), std::back_inserter(merged),
                   [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
        return TorusIntervalSet(coalesce(std::move(merged)));
    }

    friend TorusIntervalSet intersect(const TorusIntervalSet& a, const TorusIntervalSet& b)
    {
        std::vector<Interval> out;
        std::size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            const Interval& x = a.pieces_[i];
            const Interval& y = b.pieces_[j];
            const Rational& lo = x.lo < y.lo ? y.lo : x.lo;
            const Rational& hi = x.hi < y.hi ? x.hi : y.hi;
            if (lo < hi) out.push_back({lo, hi});
            if (x.hi < y.hi)
                ++i;
            else
                ++j;
        }
        // Intersections of separated pieces are separated.
        return TorusIntervalSet(std::move(out));
    }

    friend TorusIntervalSet complement(const TorusIntervalSet& a)
    {
        std::vector<Interval> out;
        Rational cursor = 0;
        for (const auto& iv : a.pieces_) {
            if (cursor < iv.lo) out.push_back({cursor, iv.lo});
            cursor = iv.hi;
        }
        if (cursor < 1) out.push_back({cursor, Rational(1)});
        return TorusIntervalSet(std::move(out));
    }

    /// Rotation by t (mod 1).
    friend TorusIntervalSet translate(const TorusIntervalSet& a, const Rational& t)
    {
        std::vector<Interval> shifted;
        shifted.reserve(a.size());
        for (const auto& iv : a.pieces_) shifted.push_back({iv.lo + t, iv.hi + t});
        return from_raw(shifted);
    }

    /// Exact containment: every piece of a lies inside one piece of b (b's
    /// pieces are separated, so a covering by several is impossible).
    friend bool is_subset(const TorusIntervalSet& a, const TorusIntervalSet& b)
    {
        std::size_t j = 0;
        for (const auto& x : a.pieces_) {
            while (j < b.size() && b.pieces_[j].hi <= x.lo) ++j;
            if (j == b.size()) return false;
            if (b.pieces_[j].lo > x.lo || b.pieces_[j].hi < x.hi) return false;
        }
        return true;
    }

    /// a ∩ [lo, hi).
    friend TorusIntervalSet restrict(const TorusIntervalSet& a, const Rational& lo, const Rational& hi)
    {
        IDSC_REQUIRE(lo >= 0 && lo < hi && hi <= 1, "restrict: need 0 <= lo < hi <= 1");
        return intersect(a, TorusIntervalSet(std::vector<Interval>{{lo, hi}}));
    }

    /// Largest bit length over endpoint denominators; used by budget guards.
    std::size_t denominator_bits() const
    {
        std::size_t bits = 0;
        for (const auto& iv : pieces_) {
            bits = std::max(bits, mpz_sizeinbase(iv.lo.get_den_mpz_t(), 2));
            bits = std::max(bits, mpz_sizeinbase(iv.hi.get_den_mpz_t(), 2));
        }
        return bits;
    }

private:
    explicit TorusIntervalSet(std::vector<Interval> canonical) : pieces_(std::move(canonical)) {}

    static TorusIntervalSet from_pieces_in_unit(std::vector<Interval> pieces)
    {
        std::sort(pieces.begin(), pieces.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
        return TorusIntervalSet(coalesce(std::move(pieces)));
    }

    // Sorted by lo; merges overlapping and touching pieces.
    static std::vector<Interval> coalesce(std::vector<Interval> sorted)
    {
        std::vector<Interval> out;
        out.reserve(sorted.size());
        for (auto& iv : sorted) {
            if (!out.empty() && iv.lo <= out.back().hi) {
                if (out.back().hi < iv.hi) out.back().hi = std::move(iv.hi);
            } else {
                out.push_back(std::move(iv));
            }
        }
        return out;
    }

    std::vector<Interval> pieces_;
};

/// Refuses sets whose endpoints need more than max_bits of denominator.
inline void enforce_denominator_budget(const TorusIntervalSet& a, std::size_t max_bits)
{
    if (a.denominator_bits() > max_bits)
        throw budget_error("interval set denominators need " + std::to_string(a.denominator_bits()) +
                           " bits; budget is " + std::to_string(max_bits));
}

/// A canonical set whose endpoints share one denominator below 2^31, so
/// intersection measures can be swept in 64-bit integers. Pure
/// acceleration: the result always equals measure(intersect(a, b)).
class ScaledIntervalSet {
public:
    static constexpr i64 kMaxDenominator = i64{1} << 31;

    static std::optional<ScaledIntervalSet> from(const TorusIntervalSet& set)
    {
        Natural den = 1;
        for (const auto& iv : set.intervals()) {
            mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), iv.lo.get_den_mpz_t());
            mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), iv.hi.get_den_mpz_t());
            if (den >= kMaxDenominator) return std::nullopt;
        }
        ScaledIntervalSet out;
        out.den_ = den.get_si();
        out.pieces_.reserve(set.size());
        for (const auto& iv : set.intervals()) {
            Natural lo = iv.lo.get_num() * (den / iv.lo.get_den());
            Natural hi = iv.hi.get_num() * (den / iv.hi.get_den());
            out.pieces_.emplace_back(lo.get_si(), hi.get_si());
        }
        return out;
    }

    i64 denominator() const { return den_; }
    const std::vector<std::pair<i64, i64>>& pieces() const { return pieces_; }

    friend Rational intersection_measure(const ScaledIntervalSet& a, const ScaledIntervalSet& b)
    {
        const i64 da = a.den_, db = b.den_;
        i64 total = 0; // over da * db < 2^62
        std::size_t i = 0, j = 0;
        while (i < a.pieces_.size() && j < b.pieces_.size()) {
            const i64 alo = a.pieces_[i].first * db, ahi = a.pieces_[i].second * db;
            const i64 blo = b.pieces_[j].first * da, bhi = b.pieces_[j].second * da;
            const i64 lo = std::max(alo, blo), hi = std::min(ahi, bhi);
            if (lo < hi) total += hi - lo;
            if (ahi < bhi)
                ++i;
            else
                ++j;
        }
        return make_rational(total, da * db);
    }

private:
    i64 den_ = 1;
    std::vector<std::pair<i64, i64>> pieces_;
};

inline nlohmann::json to_json(const TorusIntervalSet& a)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& iv : a.intervals()) arr.push_back({to_string(iv.lo), to_string(iv.hi)});
    return arr;
}

inline TorusIntervalSet torus_set_from_json(const nlohmann::json& j)
{
    IDSC_REQUIRE(j.is_array(), "interval set JSON must be an array");
    std::vector<Interval> raw;
    for (const auto& pair : j) {
        IDSC_REQUIRE(pair.is_array() && pair.size() == 2 && pair[0].is_string() && pair[1].is_string(),
                     "interval set JSON entries must be [\"lo\",\"hi\"] string pairs");
        raw.push_back({parse_rational(pair[0].get<std::string>()), parse_rational(pair[1].get<std::string>())});
    }
    return TorusIntervalSet::from_raw(raw);
}

} // namespace idsc
