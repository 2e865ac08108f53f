#include <doctest.h>

#include "oracles.hpp"
#include "padicprep/expr.hpp"

using namespace padicprep;

namespace {
const char* kParity = "t on {ord(t) in 2Z, ac1=1}; 0 on {ord(t) in 1+2Z, ac1=1}";
}

TEST_CASE("parse examples") {
  auto f = parse("t^2 + t on {all}");
  REQUIRE(f.pieces.size() == 1);
  CHECK(f.pieces[0].guard.all);
  auto g = parse(kParity);
  CHECK(g.pieces.size() == 2);
  try {
    parse("t ++ 2");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.column == 3);
  }
}

TEST_CASE("parse precedence") {
  CHECK(eval_exact(parse_expr("-2^2"), 0) == -4);
  CHECK(eval_exact(parse_expr("2*t^3 - t/4"), 2) == mpq_class(31, 2));
  CHECK(eval_exact(parse_expr("(t+1)^-1"), 1) == mpq_class(1, 2));
  CHECK(eval_exact(parse_expr("2/t"), 4) == mpq_class(1, 2));
  // a/b is one rational literal, so the power applies to the whole literal
  CHECK(eval_exact(parse_expr("2/3^2"), 0) == mpq_class(4, 9));
}

TEST_CASE("evaluation examples") {
  auto ctx = FieldContext::make(5, 8);
  auto f = parse("t^2 + t on {all}");
  CHECK(eval(f, 3, ctx) == from_rational(12, 1, ctx));
  CHECK(eval_exact(f, 3, 5) == 12);
  CHECK(eval_exact(parse("inv(t) on {all}"), 0, 3) == 0);
  auto g = parse(kParity);
  CHECK(eval_exact(g, 9, 3) == 9);
  CHECK(eval_exact(g, 3, 3) == 0);
  CHECK_THROWS_AS(eval_exact(g, 2, 3), DomainError);
}

TEST_CASE("differentiation examples") {
  auto d = differentiate(parse_expr("t^2 + t"));
  for (int t = -3; t <= 3; ++t) CHECK(eval_exact(d, t) == 2 * t + 1);
  auto di = differentiate(parse_expr("inv(t)"));
  CHECK(eval_exact(di, 3) == mpq_class(-1, 9));
  auto ctx = FieldContext::make(3, 8);
  CHECK(*ord(eval_padic(di, from_rational(3, 1, ctx), ctx)) == -2);
  CHECK(is_constant(differentiate(parse_expr("5"))));
  CHECK(eval_exact(differentiate(parse_expr("5")), 7) == 0);
  CHECK_THROWS_AS(eval_padic(di, PadicNumber::zero(ctx), ctx), PoleError);
}

TEST_CASE("max derivative norm exponent examples") {
  auto ctx = FieldContext::make(3, 8);
  auto sq = parse("t^2 on {all}");
  auto units = Cell::annulus(0, 1, 1, 1, 0, 0, 3);
  auto units2 = Cell::annulus(0, 2, 1, 1, 0, 0, 3);
  CHECK(*max_derivative_norm_exponent(sq, units, Window{0, 0, 3, false}, ctx) == 0);
  CHECK(*max_derivative_norm_exponent(sq, units2, Window{0, 0, 3, false}, ctx) == 0);
  auto low = Cell::annulus(0, mpq_class(1, 9), 1, 1, -2, -2, 3);
  CHECK(*max_derivative_norm_exponent(sq, low, Window{-2, -2, 3, false}, ctx) == 2);
  CHECK(!max_derivative_norm_exponent(parse("7 on {all}"), units, Window{0, 0, 3, false}, ctx));
}

TEST_CASE("property: derivative agrees with difference quotients") {
  // For polynomial bodies, (f(t+h) - f(t)) / h -> f'(t) p-adically as h = p^k grows.
  unsigned long p = 3;
  for (const char* text : {"t^3 - t", "t^4 + 2*t^2 - 7", "inv(t) + t", "(t^2 - 1)^-1"}) {
    auto e = parse_expr(text);
    auto d = differentiate(e);
    for (int t : {2, 4, 5, 7, 11}) {
      mpq_class h = oracle::qpow(p, 16);
      mpq_class q = (eval_exact(e, t + h) - eval_exact(e, t)) / h;
      CHECK(oracle::congruent(q, eval_exact(d, t), p, 10));
    }
  }
}

TEST_CASE("property: printer round-trip") {
  for (const char* text : {"t^2 + t on {all}", kParity, "inv(t - 1) * 3/4 on {ord(t - 1) >= 2}",
                           "-(t^3) + 2 on {ac2(t) = 4}; t on {ord(t) <= -1}"}) {
    auto f = parse(text);
    auto g = parse(print(f));
    CHECK(same_ast(f, g));
    CHECK(print(g) == print(f));
  }
}

TEST_CASE("property: guard membership agrees with the guard's cells") {
  unsigned long p = 3;
  auto W = oracle::window(-3, 3, 3, p, true);
  for (const char* text : {"t on {ord(t) in 1+2Z, ac1=2}", "t on {ord(t - 1) >= 1}", "t on {all}",
                           "t on {ord(t) >= -1, ord(t) <= 2}"}) {
    auto g = parse(text).pieces[0].guard;
    auto cells = guard_cells(g, p);
    for (const auto& t : W) {
      int hits = 0;
      for (const auto& A : cells) hits += cell_contains(A, t, p) ? 1 : 0;
      CHECK(hits == (g.contains(t, p) ? 1 : 0));
    }
  }
}
