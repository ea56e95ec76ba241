#pragma once

// Exact integers and fractions. Everything measured in this library is a
// Rational; floating point only appears in Monte Carlo estimates.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "idsc/errors.hpp"

namespace idsc {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

/// Arbitrary-precision non-negative integer (non-negativity is a caller
/// contract, mirroring the domain).
using Natural = mpz_class;

/// Arbitrary-precision fraction. gmpxx keeps results of arithmetic in lowest
/// terms with a positive denominator; only raw construction from a
/// numerator/denominator pair needs an explicit canonicalize, which
/// make_rational does.
using Rational = mpq_class;

inline Natural to_natural(u64 v)
{
    Natural n;
    mpz_import(n.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
    return n;
}

inline Rational make_rational(const Natural& num, const Natural& den)
{
    IDSC_REQUIRE(den != 0, "zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational make_rational(i64 num, i64 den)
{
    return make_rational(Natural(static_cast<long>(num)), Natural(static_cast<long>(den)));
}

inline Rational make_rational(u64 v) { return Rational(to_natural(v)); }

inline bool fits_u64(const Natural& n) { return n >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 64; }

inline u64 to_u64(const Natural& n)
{
    if (!fits_u64(n)) throw budget_error("integer does not fit in 64 bits: " + n.get_str());
    u64 v = 0;
    mpz_export(&v, nullptr, 1, sizeof(v), 0, 0, n.get_mpz_t());
    return v;
}

inline Natural floor_of(const Rational& x)
{
    Natural f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return f;
}

inline Natural ceil_of(const Rational& x)
{
    Natural c;
    mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return c;
}

/// x mod 1, in [0, 1).
inline Rational frac_of(const Rational& x) { return x - Rational(floor_of(x)); }

inline Rational rpow(const Rational& x, unsigned e)
{
    Rational out;
    mpz_pow_ui(out.get_num_mpz_t(), x.get_num_mpz_t(), e);
    mpz_pow_ui(out.get_den_mpz_t(), x.get_den_mpz_t(), e);
    return out;
}

inline Rational rmin(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// "p/q" (or "p" when the denominator is 1). This is the only textual form a
/// Rational takes across any interface.
/// Always "p/q", including integers ("0/1", "1/1").
inline std::string to_string(const Rational& x)
{
    return x.get_num().get_str(10) + "/" + x.get_den().get_str(10);
}
inline std::string to_string(const Natural& x) { return x.get_str(10); }

/// Accepts "p/q", "p", and optional leading sign; rejects anything else,
/// including decimals, so no value silently passes through a float.
inline Rational parse_rational(std::string_view text)
{
    auto digits = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!digits(num) || !digits(den) || den[0] == '-' || den[0] == '+')
        throw usage_error("malformed rational '" + std::string(text) + "' (expected p/q)");
    std::string n(num);
    if (n[0] == '+') n.erase(0, 1);
    Natural d{std::string(den)};
    IDSC_REQUIRE(d != 0, "zero denominator in '" + std::string(text) + "'");
    return make_rational(Natural(n), d);
}

inline Natural parse_natural(std::string_view text)
{
    Rational r = parse_rational(text);
    if (r.get_den() != 1 || r < 0) throw usage_error("expected a non-negative integer, got '" + std::string(text) + "'");
    return r.get_num();
}

inline double to_double(const Rational& x) { return x.get_d(); }

} // namespace idsc
