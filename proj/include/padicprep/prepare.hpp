#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "padicprep/expr.hpp"
#include "padicprep/geometry.hpp"
#include "padicprep/jacobian.hpp"

namespace padicprep {

/// Data attached to one function on one cell: f is approximated by d + m.
struct CellApproximation {
  Rational d;
  FractionalMonomial m;
  int ell_prime = 1;  // coset depth of the fitted image cell
  bool verified = false;
  std::uint64_t checked_points = 0;
  std::uint64_t checked_pairs = 0;
  std::string sample;  // "window", "synthetic" or "point"
};

struct PreparedCell {
  Cell cell;
  int ell = 1;  // coset depth of the cell
  bool thin = false;
  std::string provenance;
  std::vector<CellApproximation> fns;  // one per input function
};

struct Partition {
  std::vector<PreparedCell> cells;
  std::vector<std::string> log;
  int n = 1;
};

/// Points used to certify a cell: its window points, or, when the window
/// misses the cell, a few synthetic points from the first radii of the cell.
std::vector<Rational> certification_sample(const Cell& A, const Window& W, std::uint64_t p, std::string* kind = nullptr);
std::vector<Rational> certification_sample(const Cell& A, const WindowIndex& idx, std::string* kind = nullptr);

/// d + e (t - c)^a as a function.
PiecewiseFunction monomial_function(const Rational& d, const FractionalMonomial& m);

/// Cells with d_j + m_j and f_j n-equicompatible for every j. The domain is
/// a guard (use Guard::everything() for the whole line). Throws Error with the
/// offending cell when a produced cell fails certification.
Partition prepare(const std::vector<PiecewiseFunction>& fs, int n, const Guard& domain, const Window& W,
                  const FieldContext& ctx);

/// Every window point of the domain lies in exactly one cell, and no cell
/// contains a point outside the domain.
PropertyReport check_tiling(const Partition& P, const Guard& domain, const Window& W, std::uint64_t p);

struct ClassicalCell {
  Cell cell;
  std::vector<FractionalMonomial> monomials;  // one per function, b = 1
  std::vector<std::string> rule;              // "center", "monomial" or "refined"
  std::string provenance;
};

struct ClassicalPartition {
  std::vector<ClassicalCell> cells;
  PropertyReport report;  // rv_n(f) = rv_n(monomial) on every sampled point
};

ClassicalPartition classical_decomposition(const std::vector<PiecewiseFunction>& fs, int n, const Guard& domain,
                                           const Window& W, const FieldContext& ctx);

struct UniquenessReport {
  PropertyReport report;
  std::uint64_t perturbations = 0;
  std::uint64_t rejected = 0;
};

/// Perturbs the coefficient of fns[index].m outside its rv_n class and
/// confirms that each perturbed approximation fails equicompatibility.
UniquenessReport uniqueness_check(const PreparedCell& pc, const PiecewiseFunction& f, int n, const Window& W,
                                  const FieldContext& ctx, std::size_t index = 0);
UniquenessReport uniqueness_check(const PreparedCell& pc, const PiecewiseFunction& f, int n, const WindowIndex& idx,
                                  const FieldContext& ctx, std::size_t index = 0);

}  // namespace padicprep
