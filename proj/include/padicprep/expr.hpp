#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "padicprep/geometry.hpp"
#include "padicprep/padic.hpp"
#include "padicprep/poly.hpp"

namespace padicprep {

struct SourceSpan {
  int begin = 0;  // 0-based column offsets
  int end = 0;
};

enum class Op { Const, Var, Add, Sub, Mul, Neg, Inv, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression over rational constants and the variable t. Inv is the field
/// inverse with 0^{-1} = 0; inverses introduced by differentiation are
/// `pole_on_zero`, so evaluating a derivative at a zero of the inverted term
/// raises PoleError instead of returning 0.
struct Expr {
  Op op = Op::Const;
  Rational value;
  std::int64_t exponent = 0;
  ExprPtr lhs;
  ExprPtr rhs;
  bool pole_on_zero = false;
  SourceSpan span;
};

namespace ex {
ExprPtr constant(const Rational& v, SourceSpan span = {});
ExprPtr var(SourceSpan span = {});
ExprPtr add(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr sub(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr mul(ExprPtr a, ExprPtr b, SourceSpan span = {});
ExprPtr neg(ExprPtr a, SourceSpan span = {});
ExprPtr inv(ExprPtr a, bool pole_on_zero = false, SourceSpan span = {});
ExprPtr pow(ExprPtr a, std::int64_t e, SourceSpan span = {});
}  // namespace ex

/// Structural equality, ignoring source spans.
bool same_ast(const ExprPtr& a, const ExprPtr& b);
std::string print(const ExprPtr& e);

Rational eval_exact(const ExprPtr& e, const Rational& t);
PadicNumber eval_padic(const ExprPtr& e, const PadicNumber& t, const FieldContext& ctx);
ExprPtr differentiate(const ExprPtr& e);
bool is_constant(const ExprPtr& e);

/// P/Q with the same values as e away from zeros of inverted subterms.
struct RationalFunction {
  Poly num;
  Poly den;
};
RationalFunction to_rational_function(const ExprPtr& e);
/// Every polynomial whose zeros are special points of e (inverted subterms).
std::vector<Poly> inverted_subterms(const ExprPtr& e);

/// A domain condition on t - c: valuation bounds and congruence, an
/// angular-component class, or an explicit coset lambda*Q_{m,n}. `all`
/// matches every t. A guard is a finite union of cells (see guard_cells).
struct Guard {
  bool all = false;
  Rational center;
  std::optional<std::int64_t> ord_min;
  std::optional<std::int64_t> ord_max;
  std::optional<std::pair<std::int64_t, std::int64_t>> congruence;  // (residue, modulus)
  std::optional<std::pair<int, std::uint64_t>> ac;                  // (level, residue)
  std::optional<std::pair<Rational, std::pair<int, int>>> coset;    // (lambda, (m, n))

  static Guard everything();
  bool contains(const Rational& t, std::uint64_t p) const;
};

std::string print(const Guard& g);
/// Disjoint cells whose union is the guard.
std::vector<Cell> guard_cells(const Guard& g, std::uint64_t p);
Guard guard_from_cell(const Cell& A, std::uint64_t p);

struct Piece {
  Guard guard;
  ExprPtr body;
};

struct PiecewiseFunction {
  std::vector<Piece> pieces;

  /// Index of the piece whose guard contains t, if any.
  std::optional<std::size_t> piece_at(const Rational& t, std::uint64_t p) const;
};

std::string print(const PiecewiseFunction& f);
bool same_ast(const PiecewiseFunction& a, const PiecewiseFunction& b);

Rational eval_exact(const PiecewiseFunction& f, const Rational& t, std::uint64_t p);
PadicNumber eval(const PiecewiseFunction& f, const Rational& t, const FieldContext& ctx);
PiecewiseFunction differentiate(const PiecewiseFunction& f);

/// Throws Error naming the first window point claimed by two guards.
void check_guards_disjoint(const PiecewiseFunction& f, const Window& W, std::uint64_t p);

/// max over sampled t in A of -ord f'(t); nullopt when f' vanishes on the whole sample.
std::optional<std::int64_t> max_derivative_norm_exponent(const PiecewiseFunction& f, const Cell& A, const Window& W,
                                                         const FieldContext& ctx);

struct SyntaxError : Error {
  SyntaxError(const std::string& msg, int column)
      : Error(msg + " at column " + std::to_string(column)), column(column) {}
  int column;
};

/// Grammar documented in docs/grammar.md.
PiecewiseFunction parse(const std::string& text);
ExprPtr parse_expr(const std::string& text);

}  // namespace padicprep
