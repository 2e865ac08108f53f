#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "padicprep/expr.hpp"
#include "padicprep/geometry.hpp"
#include "padicprep/jacobian.hpp"

namespace padicprep {

/// epsilon = q^exponent.
struct LipschitzBudget {
  std::int64_t exponent = 0;

  /// Largest q^e <= eps; eps must be positive.
  static LipschitzBudget floor_of(const Rational& eps, std::uint64_t p);
  Rational epsilon(std::uint64_t p) const;
};

/// |f'(t)| <= q^e at every window point of the domain, and the pairwise bound
/// for pairs inside one ball of a cell.
PropertyReport verify_local_lipschitz(const PiecewiseFunction& f, const std::vector<Cell>& domain,
                                      LipschitzBudget budget, const Window& W, const FieldContext& ctx);
PropertyReport verify_local_lipschitz(const PiecewiseFunction& f, const Cell& domain, LipschitzBudget budget,
                                      const Window& W, const FieldContext& ctx);

/// All pairs of window points of the part: |f(x) - f(y)| <= q^e |x - y|.
/// The least violating pair in sample order is reported whatever `jobs` is.
PropertyReport verify_global_lipschitz(const PiecewiseFunction& f, const std::vector<Cell>& part,
                                       LipschitzBudget budget, const Window& W, const FieldContext& ctx,
                                       int jobs = 1);
PropertyReport verify_global_lipschitz(const PiecewiseFunction& f, const Cell& part, LipschitzBudget budget,
                                       const Window& W, const FieldContext& ctx, int jobs = 1);

/// Smallest e with |f'| <= q^e on the window points of the domain; nullopt
/// when f' vanishes there.
std::optional<std::int64_t> measured_exponent(const PiecewiseFunction& f, const std::vector<Cell>& domain,
                                              const Window& W, const FieldContext& ctx);

/// Cells of the domain guard, split along the pieces of f.
std::vector<Cell> lipschitz_domain(const PiecewiseFunction& f, const Guard& domain, std::uint64_t p);

struct LipschitzPart {
  std::vector<Cell> cells;
  std::string origin;  // "region", "cell" or "excised"
  std::optional<std::size_t> piece;
  bool beyond_window = false;  // some cell reaches radii outside the window
  PropertyReport report;
};

struct LipschitzDecomposition {
  LipschitzBudget budget;
  int n = 1;
  PropertyReport local;
  std::vector<LipschitzPart> parts;
  std::uint64_t prepared_cells = 0;
  std::uint64_t excised = 0;
  std::vector<std::string> log;
};

/// Parts on which f is globally Lipschitz with the same budget. Throws
/// PreconditionError when the local check fails, Error when a part fails.
LipschitzDecomposition decompose_lipschitz(const PiecewiseFunction& f, const Guard& domain, LipschitzBudget budget,
                                           int n, const Window& W, const FieldContext& ctx, int jobs = 1);

}  // namespace padicprep
