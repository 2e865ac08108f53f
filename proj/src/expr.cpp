#include "padicprep/expr.hpp"

#include <algorithm>
#include <sstream>

namespace padicprep {

namespace ex {

namespace {
ExprPtr make(Op op, ExprPtr a, ExprPtr b, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  e->span = span;
  return e;
}
}  // namespace

ExprPtr constant(const Rational& v, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Const;
  e->value = v;
  e->span = span;
  return e;
}

ExprPtr var(SourceSpan span) { return make(Op::Var, nullptr, nullptr, span); }
ExprPtr add(ExprPtr a, ExprPtr b, SourceSpan span) { return make(Op::Add, std::move(a), std::move(b), span); }
ExprPtr sub(ExprPtr a, ExprPtr b, SourceSpan span) { return make(Op::Sub, std::move(a), std::move(b), span); }
ExprPtr mul(ExprPtr a, ExprPtr b, SourceSpan span) { return make(Op::Mul, std::move(a), std::move(b), span); }
ExprPtr neg(ExprPtr a, SourceSpan span) { return make(Op::Neg, std::move(a), nullptr, span); }

ExprPtr inv(ExprPtr a, bool pole_on_zero, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Inv;
  e->lhs = std::move(a);
  e->pole_on_zero = pole_on_zero;
  e->span = span;
  return e;
}

ExprPtr pow(ExprPtr a, std::int64_t k, SourceSpan span) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Pow;
  e->lhs = std::move(a);
  e->exponent = k;
  e->span = span;
  return e;
}

}  // namespace ex

bool same_ast(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::Const:
      return a->value == b->value;
    case Op::Var:
      return true;
    case Op::Pow:
      return a->exponent == b->exponent && same_ast(a->lhs, b->lhs);
    default:
      return same_ast(a->lhs, b->lhs) && same_ast(a->rhs, b->rhs);
  }
}

namespace {

int precedence(const Expr& e) {
  switch (e.op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_into(std::ostream& os, const ExprPtr& e, int min_prec) {
  bool paren = precedence(*e) < min_prec;
  if (paren) os << '(';
  switch (e->op) {
    case Op::Const:
      os << e->value.get_num();
      if (e->value.get_den() != 1) os << '/' << e->value.get_den();
      break;
    case Op::Var:
      os << 't';
      break;
    case Op::Add:
      print_into(os, e->lhs, 1);
      os << " + ";
      print_into(os, e->rhs, 2);
      break;
    case Op::Sub:
      print_into(os, e->lhs, 1);
      os << " - ";
      print_into(os, e->rhs, 2);
      break;
    case Op::Mul:
      print_into(os, e->lhs, 2);
      os << '*';
      print_into(os, e->rhs, 3);
      break;
    case Op::Neg:
      os << '-';
      // a bare literal after '-' would be read back as a negative constant
      print_into(os, e->lhs, e->lhs->op == Op::Const ? 6 : 3);
      break;
    case Op::Inv:
      os << "inv(";
      print_into(os, e->lhs, 1);
      os << ')';
      break;
    case Op::Pow:
      print_into(os, e->lhs, e->lhs->op == Op::Const && (e->lhs->value < 0 || e->lhs->value.get_den() != 1) ? 6 : 5);
      os << '^' << e->exponent;
      break;
  }
  if (paren) os << ')';
}

// Simplifying constructors used by differentiation.
bool is_const(const ExprPtr& e, long v) { return e->op == Op::Const && e->value == v; }

ExprPtr s_add(ExprPtr a, ExprPtr b) {
  if (a->op == Op::Const && b->op == Op::Const) return ex::constant(a->value + b->value);
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return ex::add(a, b);
}

ExprPtr s_neg(ExprPtr a) {
  if (a->op == Op::Const) return ex::constant(-a->value);
  if (a->op == Op::Neg) return a->lhs;
  return ex::neg(a);
}

ExprPtr s_sub(ExprPtr a, ExprPtr b) {
  if (a->op == Op::Const && b->op == Op::Const) return ex::constant(a->value - b->value);
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return s_neg(b);
  return ex::sub(a, b);
}

ExprPtr s_mul(ExprPtr a, ExprPtr b) {
  if (a->op == Op::Const && b->op == Op::Const) return ex::constant(a->value * b->value);
  if (is_const(a, 0) || is_const(b, 0)) return ex::constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (is_const(a, -1)) return s_neg(b);
  return ex::mul(a, b);
}

ExprPtr s_pow(ExprPtr a, std::int64_t k, bool pole) {
  if (k == 0) return ex::constant(1);
  if (k == 1) return a;
  auto e = std::make_shared<Expr>();
  e->op = Op::Pow;
  e->lhs = std::move(a);
  e->exponent = k;
  e->pole_on_zero = pole;
  return e;
}

Rational rat_pow(const Rational& x, std::int64_t k) {
  Rational r = 1;
  Rational b = x;
  std::uint64_t e = static_cast<std::uint64_t>(k < 0 ? -k : k);
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return k < 0 ? Rational(1 / r) : r;
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::ostringstream os;
  print_into(os, e, 1);
  return os.str();
}

bool is_constant(const ExprPtr& e) {
  if (e->op == Op::Var) return false;
  if (e->lhs && !is_constant(e->lhs)) return false;
  if (e->rhs && !is_constant(e->rhs)) return false;
  return true;
}

Rational eval_exact(const ExprPtr& e, const Rational& t) {
  switch (e->op) {
    case Op::Const:
      return e->value;
    case Op::Var:
      return t;
    case Op::Add:
      return eval_exact(e->lhs, t) + eval_exact(e->rhs, t);
    case Op::Sub:
      return eval_exact(e->lhs, t) - eval_exact(e->rhs, t);
    case Op::Mul:
      return eval_exact(e->lhs, t) * eval_exact(e->rhs, t);
    case Op::Neg:
      return -eval_exact(e->lhs, t);
    case Op::Inv: {
      Rational x = eval_exact(e->lhs, t);
      if (x == 0) {
        if (e->pole_on_zero) throw PoleError("pole at t = " + to_string(t));
        return 0;
      }
      return 1 / x;
    }
    case Op::Pow: {
      Rational x = eval_exact(e->lhs, t);
      if (x == 0 && e->exponent < 0) {
        if (e->pole_on_zero) throw PoleError("pole at t = " + to_string(t));
        return 0;
      }
      return rat_pow(x, e->exponent);
    }
  }
  return 0;
}

PadicNumber eval_padic(const ExprPtr& e, const PadicNumber& t, const FieldContext& ctx) {
  switch (e->op) {
    case Op::Const:
      return from_rational(e->value, ctx);
    case Op::Var:
      return t;
    case Op::Add:
      return add(eval_padic(e->lhs, t, ctx), eval_padic(e->rhs, t, ctx));
    case Op::Sub:
      return sub(eval_padic(e->lhs, t, ctx), eval_padic(e->rhs, t, ctx));
    case Op::Mul:
      return mul(eval_padic(e->lhs, t, ctx), eval_padic(e->rhs, t, ctx));
    case Op::Neg:
      return neg(eval_padic(e->lhs, t, ctx));
    case Op::Inv: {
      PadicNumber x = eval_padic(e->lhs, t, ctx);
      if (x.is_zero() && e->pole_on_zero) throw PoleError("pole in derivative");
      return inv(x);
    }
    case Op::Pow: {
      PadicNumber x = eval_padic(e->lhs, t, ctx);
      if (e->exponent >= 0) return pow(x, e->exponent);
      if (x.is_zero() && e->pole_on_zero) throw PoleError("pole in derivative");
      return inv(pow(x, -e->exponent));
    }
  }
  return PadicNumber::zero(ctx);
}

ExprPtr differentiate(const ExprPtr& e) {
  switch (e->op) {
    case Op::Const:
      return ex::constant(0);
    case Op::Var:
      return ex::constant(1);
    case Op::Add:
      return s_add(differentiate(e->lhs), differentiate(e->rhs));
    case Op::Sub:
      return s_sub(differentiate(e->lhs), differentiate(e->rhs));
    case Op::Mul:
      return s_add(s_mul(differentiate(e->lhs), e->rhs), s_mul(e->lhs, differentiate(e->rhs)));
    case Op::Neg:
      return s_neg(differentiate(e->lhs));
    case Op::Inv: {
      ExprPtr d = differentiate(e->lhs);
      if (is_const(d, 0)) return ex::constant(0);
      return s_neg(s_mul(d, s_pow(e->lhs, -2, true)));
    }
    case Op::Pow: {
      ExprPtr d = differentiate(e->lhs);
      if (is_const(d, 0) || e->exponent == 0) return ex::constant(0);
      std::int64_t k = e->exponent;
      bool pole = e->pole_on_zero || k - 1 < 0;
      return s_mul(s_mul(ex::constant(Rational(static_cast<long>(k))), s_pow(e->lhs, k - 1, pole)), d);
    }
  }
  return ex::constant(0);
}

namespace {

RationalFunction reduce(Poly n, Poly d) {
  if (n.is_zero()) return {Poly(), Poly::constant(1)};
  Poly g = gcd(n, d);
  Poly q1, r1, q2, r2;
  n.divmod(g, q1, r1);
  d.divmod(g, q2, r2);
  Rational lead = q2.leading();
  return {Rational(1) / lead * q1, Rational(1) / lead * q2};
}

RationalFunction rf_pow(RationalFunction b, std::int64_t k) {
  if (k < 0) {
    if (b.num.is_zero()) return {Poly(), Poly::constant(1)};
    std::swap(b.num, b.den);
    k = -k;
  }
  Poly n = Poly::constant(1), d = Poly::constant(1);
  for (std::int64_t i = 0; i < k; ++i) {
    n = n * b.num;
    d = d * b.den;
  }
  return reduce(n, d);
}

}  // namespace

RationalFunction to_rational_function(const ExprPtr& e) {
  switch (e->op) {
    case Op::Const:
      return {Poly::constant(e->value), Poly::constant(1)};
    case Op::Var:
      return {Poly::identity(), Poly::constant(1)};
    case Op::Add:
    case Op::Sub: {
      auto a = to_rational_function(e->lhs);
      auto b = to_rational_function(e->rhs);
      Poly x = a.num * b.den, y = b.num * a.den;
      return reduce(e->op == Op::Add ? x + y : x - y, a.den * b.den);
    }
    case Op::Mul: {
      auto a = to_rational_function(e->lhs);
      auto b = to_rational_function(e->rhs);
      return reduce(a.num * b.num, a.den * b.den);
    }
    case Op::Neg: {
      auto a = to_rational_function(e->lhs);
      return {Rational(-1) * a.num, a.den};
    }
    case Op::Inv:
      return rf_pow(to_rational_function(e->lhs), -1);
    case Op::Pow:
      return rf_pow(to_rational_function(e->lhs), e->exponent);
  }
  return {Poly(), Poly::constant(1)};
}

std::vector<Poly> inverted_subterms(const ExprPtr& e) {
  std::vector<Poly> out;
  if (e->lhs) {
    auto l = inverted_subterms(e->lhs);
    out.insert(out.end(), l.begin(), l.end());
  }
  if (e->rhs) {
    auto r = inverted_subterms(e->rhs);
    out.insert(out.end(), r.begin(), r.end());
  }
  if (e->op == Op::Inv || (e->op == Op::Pow && e->exponent < 0)) {
    Poly n = to_rational_function(e->lhs).num;
    if (n.degree() >= 1) out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------- guards

Guard Guard::everything() {
  Guard g;
  g.all = true;
  return g;
}

bool Guard::contains(const Rational& t, std::uint64_t p) const {
  if (all) return true;
  Rational s = t - center;
  if (coset) {
    Cell A{center, coset->first, coset->second.first, coset->second.second, std::nullopt, std::nullopt};
    if (!cell_contains(A, t, p)) return false;
  }
  if (s == 0) return !ord_max && !congruence && !ac;
  std::int64_t o = ord_p(s, p);
  if (ord_min && o < *ord_min) return false;
  if (ord_max && o > *ord_max) return false;
  if (congruence) {
    std::int64_t n = congruence->second;
    if (((o - congruence->first) % n + n) % n != 0) return false;
  }
  if (ac && ac_exact(s, p, ac->first) != ac->second) return false;
  return true;
}

std::string print(const Guard& g) {
  if (g.all) return "{all}";
  std::string var = "t";
  if (g.center > 0) var = "t-" + (g.center.get_den() == 1 ? g.center.get_num().get_str() : g.center.get_str());
  if (g.center < 0) {
    Rational c = -g.center;
    var = "t+" + (c.get_den() == 1 ? c.get_num().get_str() : c.get_str());
  }
  std::vector<std::string> parts;
  std::string o = "ord(" + var + ")";
  if (g.ord_min && g.ord_max && *g.ord_min == *g.ord_max) {
    parts.push_back(o + " = " + std::to_string(*g.ord_min));
  } else {
    if (g.ord_min) parts.push_back(o + " >= " + std::to_string(*g.ord_min));
    if (g.ord_max) parts.push_back(o + " <= " + std::to_string(*g.ord_max));
  }
  if (g.congruence) {
    std::string r = g.congruence->first == 0 ? "" : std::to_string(g.congruence->first) + "+";
    parts.push_back(o + " in " + r + std::to_string(g.congruence->second) + "Z");
  }
  if (g.ac) {
    std::string lhs = "ac" + std::to_string(g.ac->first);
    if (g.center != 0) lhs += "(" + var + ")";
    parts.push_back(lhs + "=" + std::to_string(g.ac->second));
  }
  if (g.coset) {
    const Rational& l = g.coset->first;
    parts.push_back("coset" + (g.center != 0 ? "(" + var + ")" : std::string()) + " " + (l.get_den() == 1 ? l.get_num().get_str() : l.get_str()) + " Q[" +
                    std::to_string(g.coset->second.first) + "," + std::to_string(g.coset->second.second) + "]");
  }
  if (parts.empty()) return "{}";
  std::string out = "{";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out + "}";
}

std::vector<Cell> guard_cells(const Guard& g, std::uint64_t p) {
  std::vector<Cell> out;
  auto push = [&](const Cell& A) {
    try {
      validate_cell(A, p);
      out.push_back(A);
    } catch (const PreconditionError&) {
    }
  };
  if (g.all) {
    out.push_back(Cell::point(0));
    for (std::uint64_t a = 1; a < p; ++a)
      out.push_back(Cell::annulus(0, Rational(static_cast<unsigned long>(a)), 1, 1, std::nullopt, std::nullopt, p));
    return out;
  }
  if (g.coset) {
    if (g.ac || g.congruence)
      throw PreconditionError("a coset guard cannot be combined with ac or congruence conditions");
    if (g.coset->first == 0) {
      if (!g.ord_max) out.push_back(Cell::point(g.center));
      return out;
    }
    push(Cell::annulus(g.center, g.coset->first, g.coset->second.first, g.coset->second.second, g.ord_min,
                       g.ord_max, p));
    return out;
  }
  if (!g.ord_max && !g.congruence && !g.ac) out.push_back(Cell::point(g.center));
  int n = g.congruence ? static_cast<int>(g.congruence->second) : 1;
  std::int64_t r = g.congruence ? g.congruence->first : 0;
  Rational pr = pow_p(p, r);
  if (g.ac) {
    if (g.ac->second % p == 0) throw PreconditionError("ac residue must be a unit");
    push(Cell::annulus(g.center, pr * Rational(static_cast<unsigned long>(g.ac->second)), g.ac->first, n,
                       g.ord_min, g.ord_max, p));
  } else {
    for (std::uint64_t a = 1; a < p; ++a)
      push(Cell::annulus(g.center, pr * Rational(static_cast<unsigned long>(a)), 1, n, g.ord_min, g.ord_max, p));
  }
  return out;
}

Guard guard_from_cell(const Cell& A, std::uint64_t p) {
  Guard g;
  g.center = A.center;
  g.coset = std::make_pair(A.lambda, std::make_pair(A.m, A.n));
  if (!A.is_point()) {
    g.ord_min = A.ord_min(p);
    g.ord_max = A.ord_max(p);
  }
  return g;
}

// ---------------------------------------------------------------- piecewise

std::optional<std::size_t> PiecewiseFunction::piece_at(const Rational& t, std::uint64_t p) const {
  for (std::size_t i = 0; i < pieces.size(); ++i)
    if (pieces[i].guard.contains(t, p)) return i;
  return std::nullopt;
}

std::string print(const PiecewiseFunction& f) {
  std::string out;
  for (std::size_t i = 0; i < f.pieces.size(); ++i) {
    if (i) out += "; ";
    out += print(f.pieces[i].body) + " on " + print(f.pieces[i].guard);
  }
  return out;
}

bool same_ast(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  if (a.pieces.size() != b.pieces.size()) return false;
  for (std::size_t i = 0; i < a.pieces.size(); ++i) {
    const Guard& x = a.pieces[i].guard;
    const Guard& y = b.pieces[i].guard;
    if (x.all != y.all || x.center != y.center || x.ord_min != y.ord_min || x.ord_max != y.ord_max ||
        x.congruence != y.congruence || x.ac != y.ac || x.coset != y.coset)
      return false;
    if (!same_ast(a.pieces[i].body, b.pieces[i].body)) return false;
  }
  return true;
}

Rational eval_exact(const PiecewiseFunction& f, const Rational& t, std::uint64_t p) {
  auto i = f.piece_at(t, p);
  if (!i) throw DomainError("t = " + to_string(t) + " is outside every guard");
  return eval_exact(f.pieces[*i].body, t);
}

PadicNumber eval(const PiecewiseFunction& f, const Rational& t, const FieldContext& ctx) {
  return from_rational(eval_exact(f, t, ctx.p), ctx);
}

PiecewiseFunction differentiate(const PiecewiseFunction& f) {
  PiecewiseFunction d;
  for (const auto& piece : f.pieces) d.pieces.push_back({piece.guard, differentiate(piece.body)});
  return d;
}

void check_guards_disjoint(const PiecewiseFunction& f, const Window& W, std::uint64_t p) {
  std::vector<Rational> pts = window_points(W, p);
  pts.push_back(0);
  for (const auto& piece : f.pieces)
    if (!piece.guard.all) pts.push_back(piece.guard.center);
  for (const auto& t : pts) {
    int hits = 0;
    for (const auto& piece : f.pieces) hits += piece.guard.contains(t, p) ? 1 : 0;
    if (hits > 1) throw Error("guards overlap at t = " + to_string(t));
  }
}

std::optional<std::int64_t> max_derivative_norm_exponent(const PiecewiseFunction& f, const Cell& A, const Window& W,
                                                         const FieldContext& ctx) {
  std::vector<Rational> pts = A.is_point() ? std::vector<Rational>{A.center} : enumerate_points(A, W, ctx.p);
  std::vector<Rational> in_domain;
  for (const auto& t : pts)
    if (f.piece_at(t, ctx.p)) in_domain.push_back(t);
  if (in_domain.empty()) throw PreconditionError("no sample points of the cell lie in the window and the domain");
  PiecewiseFunction d = differentiate(f);
  std::optional<std::int64_t> best;
  for (const auto& t : in_domain) {
    Rational v = eval_exact(d, t, ctx.p);
    if (v == 0) continue;
    std::int64_t e = -ord_p(v, ctx.p);
    if (!best || e > *best) best = e;
  }
  return best;
}

}  // namespace padicprep
