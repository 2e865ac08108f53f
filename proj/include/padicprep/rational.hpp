#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace padicprep {

using Rational = mpq_class;
using Integer = mpz_class;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fewer than one significant digit survived an operation.
struct PrecisionError : Error {
  using Error::Error;
};

/// An operation was called outside its declared preconditions.
struct PreconditionError : Error {
  using Error::Error;
};

/// Evaluation hit a zero of an inverted subterm inside a derivative.
struct PoleError : Error {
  using Error::Error;
};

/// Point is outside the domain of a piecewise function.
struct DomainError : Error {
  using Error::Error;
};

Rational make_rational(long num, long den = 1);

/// p-adic valuation of a nonzero integer.
std::int64_t ord_p(const Integer& x, std::uint64_t p);

/// p-adic valuation of a nonzero rational.
std::int64_t ord_p(const Rational& x, std::uint64_t p);

/// Exact p^e as a rational (e may be negative).
Rational pow_p(std::uint64_t p, std::int64_t e);

/// Always "num/den", including integers ("5/1").
std::string to_string(const Rational& x);

/// Accepts "a", "a/b", "-a/b"; throws Error on malformed text or zero denominator.
Rational parse_rational(std::string_view text);

}  // namespace padicprep
