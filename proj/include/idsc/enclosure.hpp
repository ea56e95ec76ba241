#pragma once

// Summation with guaranteed bounds: the lower accumulator rounds toward
// -inf, the upper toward +inf, so the exact sum always lies in [lower, upper].

#include <mpfr.h>

#include "idsc/errors.hpp"
#include "idsc/rational.hpp"

namespace idsc {

/// [lower, upper] with exact rational endpoints; lower == upper in exact mode.
struct Bounds {
    Rational lower;
    Rational upper;

    static Bounds exact(const Rational& v) { return {v, v}; }
    bool is_exact() const { return lower == upper; }
    bool contains(const Rational& v) const { return lower <= v && v <= upper; }
};

class DirectedSum {
public:
    explicit DirectedSum(unsigned precision_bits)
    {
        IDSC_REQUIRE(precision_bits >= 64, "enclosure precision must be >= 64 bits");
        mpfr_init2(lo_, precision_bits);
        mpfr_init2(hi_, precision_bits);
        mpfr_set_zero(lo_, 1);
        mpfr_set_zero(hi_, 1);
    }
    DirectedSum(const DirectedSum& o)
    {
        mpfr_init2(lo_, mpfr_get_prec(o.lo_));
        mpfr_init2(hi_, mpfr_get_prec(o.hi_));
        mpfr_set(lo_, o.lo_, MPFR_RNDD);
        mpfr_set(hi_, o.hi_, MPFR_RNDU);
    }
    DirectedSum& operator=(const DirectedSum&) = delete;
    ~DirectedSum()
    {
        mpfr_clear(lo_);
        mpfr_clear(hi_);
    }

    void add(const Rational& v)
    {
        mpfr_add_q(lo_, lo_, v.get_mpq_t(), MPFR_RNDD);
        mpfr_add_q(hi_, hi_, v.get_mpq_t(), MPFR_RNDU);
    }

    void add(const DirectedSum& o)
    {
        mpfr_add(lo_, lo_, o.lo_, MPFR_RNDD);
        mpfr_add(hi_, hi_, o.hi_, MPFR_RNDU);
    }

    Bounds bounds() const { return {to_rational(lo_), to_rational(hi_)}; }

private:
    static Rational to_rational(const mpfr_t x)
    {
        Rational out;
        mpfr_get_q(out.get_mpq_t(), x);
        return out;
    }

    mpfr_t lo_, hi_;
};

/// Exact rational a / b^2 bounds for non-negative enclosures.
inline Bounds ratio_over_square(const Bounds& a, const Bounds& b)
{
    IDSC_REQUIRE(b.lower > 0, "ratio undefined: denominator enclosure touches 0");
    return {a.lower / (b.upper * b.upper), a.upper / (b.lower * b.lower)};
}

} // namespace idsc
