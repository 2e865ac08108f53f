#pragma once

#include <string>

#include <json.hpp>

#include "padicprep/expr.hpp"
#include "padicprep/jacobian.hpp"
#include "padicprep/lipschitz.hpp"
#include "padicprep/prepare.hpp"

namespace padicprep {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr const char* kSchemaId = "padic-prep-report/1";

Json to_json(const Rational& x);
Rational rational_from_json(const Json& j);

Json to_json(const Window& W);
Json to_json(const Ball& B);
Json to_json(const Cell& A, std::uint64_t p);
Json to_json(const RVElement& r);
Json to_json(const FractionalMonomial& m);
Json to_json(const Guard& g);

/// Counterexample points carry their base-p digit expansions.
Json to_json(const Counterexample& c, const FieldContext& ctx);
Json to_json(const PropertyReport& r, const FieldContext& ctx);
Json to_json(const ImageCell& I, std::uint64_t p);
Json to_json(const CompatibilityReport& r, const FieldContext& ctx);
Json to_json(const EquicompatibilityReport& r, const FieldContext& ctx);
Json to_json(const SolverResult& r, const FieldContext& ctx);
Json to_json(const Partition& P, const FieldContext& ctx);
Json to_json(const ClassicalPartition& P, const FieldContext& ctx);
Json to_json(const UniquenessReport& r, const FieldContext& ctx);
Json to_json(const LipschitzDecomposition& d, const FieldContext& ctx);

/// AST mirror of a function: {"pieces": [{"guard": {...}, "body": {...}}]}.
Json function_to_json(const PiecewiseFunction& f);
PiecewiseFunction function_from_json(const Json& j);
Json expr_to_json(const ExprPtr& e);
ExprPtr expr_from_json(const Json& j);
Guard guard_from_json(const Json& j);

}  // namespace padicprep
