#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "padicprep/rational.hpp"

namespace padicprep {

/// The field Q_p together with the working relative precision.
///
/// Only K = Q_p is implemented, so the residue cardinality q equals p and the
/// uniformizer is p itself. Units are stored in 64-bit words, which bounds
/// p^precision below 2^62.
struct FieldContext {
  std::uint64_t p = 3;
  std::uint64_t q = 3;
  int precision = 12;

  static FieldContext make(std::uint64_t p, int precision);

  /// p^e for 0 <= e <= precision + guard; throws when it would overflow.
  std::uint64_t power(int e) const;
};

bool is_prime(std::uint64_t n);

/// Modular helpers on 64-bit residues (modulus below 2^63).
std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m);
std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m);
std::uint64_t ipow(std::uint64_t base, int e);
int ord_p(std::uint64_t x, std::uint64_t p);

/// Element of Q_p with capped relative precision: p^v * u with u known mod p^N.
///
/// Exact zero is a distinguished value. A zero produced by cancelling every
/// tracked digit of two equal-precision operands is returned as exact zero
/// with cancelled() set; any other loss of all digits raises PrecisionError.
class PadicNumber {
 public:
  PadicNumber() = default;

  static PadicNumber zero(const FieldContext& ctx);
  static PadicNumber from_parts(const FieldContext& ctx, std::int64_t valuation, std::uint64_t unit,
                                int precision);

  bool is_zero() const { return zero_; }
  bool cancelled() const { return cancelled_; }
  std::uint64_t prime() const { return p_; }
  /// Meaningful only for nonzero values.
  std::int64_t valuation() const { return valuation_; }
  std::uint64_t unit() const { return unit_; }
  int precision() const { return precision_; }
  int cap() const { return cap_; }

  /// Same value on every digit both operands track.
  friend bool operator==(const PadicNumber& a, const PadicNumber& b);

  /// Base-p digits of the unit, least significant first, as "v:d0d1d2..." .
  std::string digits() const;

 private:
  std::uint64_t p_ = 0;
  std::int64_t valuation_ = 0;
  std::uint64_t unit_ = 0;
  int precision_ = 0;
  int cap_ = 0;
  bool zero_ = true;
  bool cancelled_ = false;

  friend PadicNumber add(const PadicNumber&, const PadicNumber&);
  friend PadicNumber mul(const PadicNumber&, const PadicNumber&);
  friend PadicNumber neg(const PadicNumber&);
  friend PadicNumber inv(const PadicNumber&);
  friend PadicNumber pow(const PadicNumber&, std::int64_t);
};

PadicNumber from_rational(const Rational& x, const FieldContext& ctx);
PadicNumber from_rational(long numerator, long denominator, const FieldContext& ctx);

PadicNumber add(const PadicNumber& x, const PadicNumber& y);
PadicNumber sub(const PadicNumber& x, const PadicNumber& y);
PadicNumber mul(const PadicNumber& x, const PadicNumber& y);
PadicNumber neg(const PadicNumber& x);
/// Field inverse with 0^{-1} = 0.
PadicNumber inv(const PadicNumber& x);
PadicNumber pow(const PadicNumber& x, std::int64_t e);

/// nullopt stands for +infinity.
std::optional<std::int64_t> ord(const PadicNumber& x);
/// q^{-ord x}, with |0| = 0.
Rational norm(const PadicNumber& x);

/// Angular component modulo p^m: 0 for zero, otherwise the unit mod p^m.
std::uint64_t ac(const PadicNumber& x, int m);

/// Element of RV_{K,n}: zero, or a valuation with a unit residue mod p^n.
struct RVElement {
  bool zero = true;
  std::int64_t valuation = 0;
  std::uint64_t ac = 0;
  int level = 1;
  std::uint64_t p = 0;

  static RVElement make_zero(std::uint64_t p, int level) { return {true, 0, 0, level, p}; }

  friend bool operator==(const RVElement& a, const RVElement& b);
  friend RVElement operator*(const RVElement& a, const RVElement& b);
  std::string to_string() const;
};

RVElement rv(const PadicNumber& x, int n);

/// ord(x) in nZ and ac_m(x) = 1.
bool in_Qmn(const PadicNumber& x, int m, int n);
/// x in lambda * Q_{m,n}; for lambda = 0 this means x = 0.
bool coset_member(const PadicNumber& x, const PadicNumber& lambda, int m, int n);

/// Membership in the set P_l of nonzero l-th powers, via the Hensel criterion
/// at level 2*ord_p(l) + 1.
bool is_nth_power(const PadicNumber& x, std::uint64_t l);

/// Selects one of the b-th roots: the root whose ac_level equals residue.
struct RootBranch {
  std::uint64_t residue = 1;
  int level = 1;
};

/// b-th root of x on the given branch, or nullopt if b does not divide ord(x)
/// or no root lies on the branch. The root carries precision
/// precision(x) - ord_p(b), which is exactly what r^b = x determines.
std::optional<PadicNumber> hensel_root(const PadicNumber& x, std::uint64_t b, RootBranch branch);

/// Residues a mod p^level (units) for which hensel_root(x, b, {a, level}) succeeds.
std::vector<std::uint64_t> root_branches(const PadicNumber& x, std::uint64_t b, int level);

}  // namespace padicprep
