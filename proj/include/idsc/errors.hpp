#pragma once

#include <stdexcept>
#include <string>

namespace idsc {

/// Precondition violated by the caller (bad argument, malformed spec string).
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A configured resource budget (sieve cap, prime count, piece count,
/// denominator size) would be exceeded. Operations refuse rather than
/// degrade to inexact arithmetic.
class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal identity that must hold exactly did not.
class invariant_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

#define IDSC_REQUIRE(cond, msg)                                  \
    do {                                                         \
        if (!(cond)) throw ::idsc::usage_error(std::string(msg)); \
    } while (0)

#define IDSC_ENSURE(cond, msg)                                                 \
    do {                                                                       \
        if (!(cond))                                                           \
            throw ::idsc::invariant_error(std::string(msg) + " [" #cond "]");  \
    } while (0)

} // namespace idsc
