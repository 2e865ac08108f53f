#pragma once

#include <cstdint>
#include <vector>

#include "padicprep/rational.hpp"

namespace padicprep {

/// Dense univariate polynomial over Q, coefficients lowest degree first.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs);
  static Poly constant(const Rational& c);
  static Poly identity();

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  Rational coeff(int i) const;
  Rational leading() const;

  Rational eval(const Rational& t) const;
  Poly derivative() const;
  /// Coefficients of f(c + s) as a polynomial in s.
  Poly taylor_at(const Rational& c) const;
  /// f(scale * s).
  Poly scaled(const Rational& scale) const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(const Rational& k, const Poly& b);
  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }

  void divmod(const Poly& d, Poly& q, Poly& r) const;
  Poly monic() const;

 private:
  std::vector<Rational> coeffs_;
  void trim();
};

Poly gcd(const Poly& a, const Poly& b);
/// f / gcd(f, f'), monic.
Poly squarefree_part(const Poly& f);

/// Exact roots in Q (distinct, sorted ascending).
std::vector<Rational> rational_roots(const Poly& f);

/// Rational approximations c of the roots of f in Q_p, each with
/// ord(c - root) >= digits, plus exact rational roots as themselves.
/// Roots are found per valuation from the Newton polygon and isolated by
/// splitting balls until the Weierstrass degree of the ball is 1.
std::vector<Rational> qp_root_approximations(const Poly& f, std::uint64_t p, int digits);

/// Valuations of Q_p roots suggested by the Newton polygon (integer slopes only).
std::vector<std::int64_t> newton_polygon_valuations(const Poly& f, std::uint64_t p);

}  // namespace padicprep
