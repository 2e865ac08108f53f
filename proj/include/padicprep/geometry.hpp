#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padicprep/padic.hpp"
#include "padicprep/rational.hpp"

namespace padicprep {

/// Exact valuation of a rational; nullopt for zero.
std::optional<std::int64_t> ord_exact(const Rational& x, std::uint64_t p);

/// Unit part of a nonzero rational modulo p^m.
std::uint64_t ac_exact(const Rational& x, std::uint64_t p, int m);

/// rv_n of an exact rational (no precision loss possible).
RVElement rv_exact(const Rational& x, std::uint64_t p, int n);

/// {t : ord(t - center) >= radius}.
struct Ball {
  Rational center;
  std::int64_t radius = 0;

  bool contains(const Rational& t, std::uint64_t p) const;
  friend bool operator==(const Ball& a, const Ball& b) = default;
};

/// A cell over a trivial base:
///   { t : |alpha| < |t - c| < |beta|,  t - c in lambda * Q_{m,n} }
/// with either bound possibly absent (no condition). lambda = 0 is the
/// 0-cell {c}.
struct Cell {
  Rational center;
  Rational lambda;
  int m = 1;
  int n = 1;
  std::optional<Rational> alpha;
  std::optional<Rational> beta;

  static Cell point(const Rational& c);
  /// {ord(t - c) in [ord_min, ord_max], ac_m(t - c) = ac_m(lambda), ord(t - c) = ord(lambda) mod n}
  static Cell annulus(const Rational& c, const Rational& lambda, int m, int n, std::optional<std::int64_t> ord_min,
                      std::optional<std::int64_t> ord_max, std::uint64_t p);

  bool is_point() const { return lambda == 0; }
  bool unbounded() const { return !is_point() && (!alpha || !beta); }
  /// Allowed range of ord(t - c) implied by the bounds (inclusive).
  std::optional<std::int64_t> ord_min(std::uint64_t p) const;
  std::optional<std::int64_t> ord_max(std::uint64_t p) const;

  friend bool operator==(const Cell& a, const Cell& b) = default;
};

/// Throws PreconditionError if the cell's defining data describes the empty set.
void validate_cell(const Cell& A, std::uint64_t p);

bool cell_contains(const Cell& A, const Rational& t, std::uint64_t p);

/// Maximal ball B with t in B and B inside A.
Ball ball_of_cell_at(const Cell& A, const Rational& t, std::uint64_t p);

/// Finite test set: p^v * u for v in [v_min, v_max], 1 <= u < p^k, p not dividing u,
/// optionally with 0.
struct Window {
  std::int64_t v_min = -3;
  std::int64_t v_max = 3;
  int unit_level = 4;
  bool include_zero = false;

  static Window defaults_for_level(int n) { return Window{-3, 3, n + 3, false}; }
};

/// All window points in canonical order: by valuation, then unit; zero (valuation +inf) last.
std::vector<Rational> window_points(const Window& W, std::uint64_t p);

/// Window points lying in A, canonical order.
std::vector<Rational> enumerate_points(const Cell& A, const Window& W, std::uint64_t p);
std::vector<Rational> enumerate_points(const Cell& A, const std::vector<Rational>& points, std::uint64_t p);

/// Window points tabulated per center as (ord(t - c), unit of t - c mod p^level),
/// so that cell membership becomes integer comparison. Tables are built lazily.
class WindowIndex {
 public:
  struct Entry {
    std::size_t point;
    std::uint64_t unit;
  };
  struct Table {
    std::map<std::int64_t, std::vector<Entry>> buckets;
    std::optional<std::size_t> at_center;
  };

  WindowIndex(const Window& W, std::uint64_t p);

  const std::vector<Rational>& points() const { return points_; }
  const Window& window() const { return W_; }
  std::uint64_t prime() const { return p_; }
  int level() const { return level_; }
  const Table& table(const Rational& c) const;
  /// Window points in A, canonical order.
  std::vector<Rational> in_cell(const Cell& A) const;
  /// Least and largest ord(t - c) over window points t != c.
  std::optional<std::pair<std::int64_t, std::int64_t>> hull(const Rational& c) const;

 private:
  Window W_;
  std::uint64_t p_;
  int level_;
  std::vector<Rational> points_;
  mutable std::map<Rational, Table> tables_;
};

/// Syntactic thinness, audited against the window: a mismatch throws Error.
bool is_thin(const Cell& A, const Window& W, std::uint64_t p);
/// Syntactic criterion only.
bool is_thin_syntactic(const Cell& A, std::uint64_t p);

/// m(t)^b = e * (t - c)^a with the root chosen by branch (ac at branch.level).
struct FractionalMonomial {
  Rational center;
  Rational coefficient;
  std::int64_t a = 0;
  std::int64_t b = 1;
  RVElement branch;  // rv of the value at the cell's sample point; unused when b = 1

  static FractionalMonomial integral(const Rational& center, const Rational& coefficient, std::int64_t a);
  static FractionalMonomial constant(const Rational& value);
  bool is_zero() const { return coefficient == 0; }
};

/// Exact value when b = 1.
std::optional<Rational> monomial_exact(const FractionalMonomial& m, const Rational& t);
PadicNumber monomial_eval(const FractionalMonomial& m, const Rational& t, const FieldContext& ctx);
/// rv_n of (a/b) * m(t) / (t - c).
RVElement monomial_derivative_rv(const FractionalMonomial& m, const Rational& t, int n, const FieldContext& ctx);

}  // namespace padicprep
