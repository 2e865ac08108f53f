#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "padicprep/expr.hpp"
#include "padicprep/geometry.hpp"

namespace padicprep {

struct Counterexample {
  Rational x;
  Rational y;
  std::string lhs;
  std::string rhs;
  std::string condition;  // which clause failed: "domain", "injective", "a", "c", "d", "image-cell", ...
};

struct PropertyReport {
  std::string property;
  bool pass = true;
  std::uint64_t checked_pairs = 0;
  std::uint64_t checked_points = 0;
  std::optional<Counterexample> counterexample;
  int n = 0;
  Window window;

  void fail(Counterexample c) {
    pass = false;
    counterexample = std::move(c);
  }
};

/// Ordering used for samples and witnesses: valuation ascending (zero last),
/// then absolute value, then positive before negative.
bool sample_less(const Rational& a, const Rational& b, std::uint64_t p);

/// Window points in B together with their reflections through the center of B.
std::vector<Rational> ball_sample(const Ball& B, const Window& W, std::uint64_t p);

PropertyReport check_jacobian(const PiecewiseFunction& f, const Ball& B, const Window& W, const FieldContext& ctx);
/// n = 0 is the plain Jacobian property.
PropertyReport check_n_jacobian(const PiecewiseFunction& f, const Ball& B, int n, const Window& W,
                                const FieldContext& ctx);

/// The fitted image cell A_f: either the point {d}, or the cell around d
/// cut out by the sampled valuations of f - d and the common ac at depth ell'.
struct ImageCell {
  bool point = false;
  Rational center;
  int depth = 1;              // ell'
  std::uint64_t residue = 0;  // ac_{ell'}(f - d)
  int modulus = 1;            // gcd of valuation differences, 1 for a single valuation
  std::vector<std::int64_t> valuations;
  std::uint64_t sampled_points = 0;

  Cell as_cell(std::uint64_t p) const;
  friend bool operator==(const ImageCell& a, const ImageCell& b);
};

struct CompatibilityReport {
  PropertyReport report;
  std::optional<ImageCell> image;
  std::uint64_t balls = 0;
};

/// n-compatibility of f on A. The image center defaults to f(c) (0 when c is
/// outside the domain or a pole).
CompatibilityReport check_n_compatible(const PiecewiseFunction& f, const Cell& A, int n, const Window& W,
                                       const FieldContext& ctx, std::optional<Rational> image_center = std::nullopt);

/// Same check on an explicit sample of points of A instead of a window.
CompatibilityReport check_n_compatible_on(const PiecewiseFunction& f, const Cell& A, int n,
                                          const std::vector<Rational>& sample, const FieldContext& ctx,
                                          std::optional<Rational> image_center = std::nullopt);

struct EquicompatibilityReport {
  PropertyReport report;
  CompatibilityReport f;
  CompatibilityReport g;
};

EquicompatibilityReport check_n_equicompatible(const PiecewiseFunction& f, const PiecewiseFunction& g, const Cell& A,
                                               int n, const Window& W, const FieldContext& ctx,
                                               std::optional<Rational> image_center = std::nullopt);

EquicompatibilityReport check_n_equicompatible_on(const PiecewiseFunction& f, const PiecewiseFunction& g,
                                                  const Cell& A, int n, const std::vector<Rational>& sample,
                                                  const FieldContext& ctx,
                                                  std::optional<Rational> image_center = std::nullopt);

/// Same, reusing an already computed compatibility report of f on the sample.
EquicompatibilityReport check_n_equicompatible_on(const CompatibilityReport& fc, const PiecewiseFunction& f,
                                                  const PiecewiseFunction& g, const Cell& A, int n,
                                                  const std::vector<Rational>& sample, const FieldContext& ctx,
                                                  std::optional<Rational> image_center = std::nullopt);

/// Result of a constructive solver. `value` is a representative with the
/// requested accuracy; `exact` is set when rational reconstruction found a
/// rational that satisfies the defining equation exactly.
struct SolverResult {
  bool ok = false;
  Rational value;
  std::optional<Rational> exact;
  int iterations = 0;
  std::optional<std::int64_t> achieved;  // ord of the residual; nullopt when it is exactly zero
  std::int64_t target = 0;
  std::string failure;        // named hypothesis that failed
  std::optional<Counterexample> witness;
};

int default_target(const Window& W, int n);

SolverResult banach_fixed_point(const PiecewiseFunction& f, const Ball& B, std::int64_t target, const Window& W,
                                const FieldContext& ctx);
SolverResult solve_equal_point(const PiecewiseFunction& f1, const PiecewiseFunction& f2, const Ball& B,
                               std::int64_t target, const Window& W, const FieldContext& ctx);
/// B must contain 0; M^{n-1}B is the concentric ball of radius order raised by n - 1.
SolverResult solve_equal_rv_point(const PiecewiseFunction& f1, const PiecewiseFunction& f2, const Ball& B, int n,
                                  std::int64_t target, const Window& W, const FieldContext& ctx);

/// Smallest-height rational congruent to x modulo p^M, if one with
/// |num|, |den| <= sqrt(p^M / 2) exists.
std::optional<Rational> rational_reconstruction(const Rational& x, std::uint64_t p, int M);

}  // namespace padicprep
