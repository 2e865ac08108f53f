#include <doctest.h>

#include "oracles.hpp"
#include "padicprep/lipschitz.hpp"
#include "padicprep/prepare.hpp"

using namespace padicprep;

namespace {

PiecewiseFunction fn(const char* text) { return parse(text); }
Guard guard(const char* text) { return parse(std::string("t on ") + text).pieces[0].guard; }

// |f(x) - f(y)| <= p^e |x - y|, i.e. ord(f(x) - f(y)) >= ord(x - y) - e.
bool within(const mpq_class& fx, const mpq_class& fy, const mpq_class& x, const mpq_class& y, long e,
            unsigned long p) {
  if (fx == fy) return true;
  return *oracle::val(fx - fy, p) >= *oracle::val(x - y, p) - e;
}

std::optional<std::pair<mpq_class, mpq_class>> least_witness(const PiecewiseFunction& f, const Guard& dom, long e,
                                                             const Window& W, unsigned long p) {
  std::vector<mpq_class> pts;
  for (const auto& t : oracle::window(W.v_min, W.v_max, W.unit_level, p, W.include_zero))
    if (dom.contains(t, p) && f.piece_at(t, p)) pts.push_back(t);
  std::vector<mpq_class> fx;
  for (const auto& t : pts) fx.push_back(eval_exact(f, t, p));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (!within(fx[i], fx[j], pts[i], pts[j], e, p)) return std::make_pair(pts[i], pts[j]);
  return std::nullopt;
}

const char* kParity = "t on {ord(t) in 2Z, ac1=1}; 0 on {ord(t) in 1+2Z, ac1=1}";
const char* kParityShifted = "0 on {ord(t) in 2Z, ac1=1}; 1/3 on {ord(t) in 1+2Z, ac1=1}";

}  // namespace

TEST_CASE("budget flooring") {
  CHECK(LipschitzBudget::floor_of(mpq_class(1, 2), 3).exponent == -1);
  CHECK(LipschitzBudget::floor_of(10, 3).exponent == 2);
  CHECK(LipschitzBudget::floor_of(9, 3).exponent == 2);
  CHECK(LipschitzBudget::floor_of(1, 5).exponent == 0);
  CHECK(LipschitzBudget{2}.epsilon(3) == 9);
}

TEST_CASE("local checks") {
  auto W = Window::defaults_for_level(1);
  auto c3 = FieldContext::make(3, 12);
  auto c2 = FieldContext::make(2, 12);
  auto sq = fn("t^2 on {all}");
  CHECK(verify_local_lipschitz(sq, lipschitz_domain(sq, guard("{ord(t) >= 0}"), 3), {0}, W, c3).pass);
  auto d2 = lipschitz_domain(sq, guard("{ord(t) >= 0}"), 2);
  CHECK(verify_local_lipschitz(sq, d2, {0}, W, c2).pass);
  CHECK(verify_local_lipschitz(sq, d2, {-1}, W, c2).pass);
  CHECK(*measured_exponent(sq, d2, W, c2) == -1);
  auto iv = fn("inv(t) on {all}");
  CHECK(verify_local_lipschitz(iv, lipschitz_domain(iv, guard("{ord(t) = 0}"), 3), {0}, W, c3).pass);
  auto r = verify_local_lipschitz(sq, lipschitz_domain(sq, guard("{ord(t) >= -1}"), 3), {0}, W, c3);
  CHECK(!r.pass);
  CHECK(r.counterexample->condition == "derivative");
}

TEST_CASE("global checks report the least witness") {
  auto W = Window::defaults_for_level(1);
  auto c3 = FieldContext::make(3, 12);
  auto sq = fn("t^2 on {all}");
  auto Z = guard("{ord(t) >= 0}");
  CHECK(verify_global_lipschitz(sq, lipschitz_domain(sq, Z, 3), {0}, W, c3).pass);
  CHECK(!least_witness(sq, Z, 0, W, 3));

  auto third = fn("t/3 on {all}");
  auto U = guard("{ord(t) = 0}");
  auto expect = least_witness(third, U, 0, W, 3);
  REQUIRE(expect);
  for (int jobs : {1, 4}) {
    auto r = verify_global_lipschitz(third, lipschitz_domain(third, U, 3), {0}, W, c3, jobs);
    CHECK(!r.pass);
    REQUIRE(r.counterexample);
    CHECK(r.counterexample->x == expect->first);
    CHECK(r.counterexample->y == expect->second);
  }
  CHECK(verify_global_lipschitz(third, Cell::point(1), {0}, W, c3).pass);
}

TEST_CASE("decompositions") {
  auto W = Window::defaults_for_level(1);
  auto c3 = FieldContext::make(3, 12);
  auto sq = fn("t^2 on {all}");
  auto D = decompose_lipschitz(sq, guard("{ord(t) >= 0}"), {0}, 1, W, c3);
  CHECK(D.parts.size() == 1);
  CHECK(D.parts[0].report.pass);

  auto k = fn("7 on {all}");
  CHECK(decompose_lipschitz(k, Guard::everything(), {0}, 1, W, c3).parts.size() == 1);

  auto par = fn(kParity);
  auto P = decompose_lipschitz(par, Guard::everything(), {0}, 1, W, c3);
  CHECK(P.parts.size() == 2);
  for (const auto& part : P.parts) CHECK(part.report.pass);

  CHECK_THROWS_AS(decompose_lipschitz(sq, Guard::everything(), {0}, 1, W, c3), PreconditionError);
}

TEST_CASE("valuation-parity split: pairs across the guards stay within budget") {
  // |x - y| = max(|x|, |y|) when ord x != ord y, which dominates |f(x) - f(y)|.
  auto W = Window::defaults_for_level(1);
  auto c3 = FieldContext::make(3, 12);
  auto par = fn(kParity);
  CHECK(!least_witness(par, Guard::everything(), 0, W, 3));
  CHECK(verify_global_lipschitz(par, lipschitz_domain(par, Guard::everything(), 3), {0}, W, c3).pass);

  auto shifted = fn(kParityShifted);
  auto merged = verify_global_lipschitz(shifted, lipschitz_domain(shifted, Guard::everything(), 3), {0}, W, c3);
  CHECK(!merged.pass);
  auto D = decompose_lipschitz(shifted, Guard::everything(), {0}, 1, W, c3);
  CHECK(D.parts.size() == 2);
  for (const auto& part : D.parts) CHECK(part.report.pass);
}

TEST_CASE("property: parts tile the domain and keep the budget") {
  auto W = Window::defaults_for_level(1);
  for (unsigned long p : {3ul, 5ul}) {
    auto ctx = FieldContext::make(p, 12);
    for (const char* body : {"t^3 - t", "t^2 - 1", "t^4 + t", "3*t^2 + t"}) {
      auto f = parse(std::string(body) + " on {all}");
      auto dom = guard("{ord(t) >= -1}");
      auto cells = lipschitz_domain(f, dom, p);
      auto e = measured_exponent(f, cells, W, ctx);
      REQUIRE(e);
      auto D = decompose_lipschitz(f, dom, {*e}, 1, W, ctx, 2);
      for (const auto& t : oracle::window(W.v_min, W.v_max, W.unit_level, p)) {
        int hits = 0;
        for (const auto& part : D.parts)
          for (const auto& A : part.cells) hits += cell_contains(A, t, p) ? 1 : 0;
        CHECK(hits == (dom.contains(t, p) ? 1 : 0));
      }
      for (const auto& part : D.parts) {
        CHECK(part.report.pass);
        std::vector<mpq_class> pts;
        for (const auto& A : part.cells)
          for (const auto& t : enumerate_points(A, W, p)) pts.push_back(t);
        std::vector<mpq_class> fx;
        for (const auto& t : pts) fx.push_back(eval_exact(f, t, p));
        std::size_t violations = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (std::size_t j = i + 1; j < pts.size(); ++j)
            violations += within(fx[i], fx[j], pts[i], pts[j], *e, p) ? 0 : 1;
        CHECK(violations == 0);
      }
    }
  }
}

TEST_CASE("property: pairs inside one ball of a prepared cell respect the local bound") {
  auto W = Window::defaults_for_level(1);
  auto ctx = FieldContext::make(3, 12);
  auto f = parse("t^3 - t on {all}");
  auto dom = guard("{ord(t) >= -1}");
  auto e = *measured_exponent(f, lipschitz_domain(f, dom, 3), W, ctx);
  auto P = prepare({f}, 1, dom, W, ctx);
  for (const auto& pc : P.cells) {
    if (pc.cell.is_point()) continue;
    auto pts = enumerate_points(pc.cell, W, 3);
    for (const auto& x : pts) {
      auto B = ball_of_cell_at(pc.cell, x, 3);
      for (const auto& y : pts)
        if (B.contains(y, 3)) CHECK(within(eval_exact(f, x, 3), eval_exact(f, y, 3), x, y, e, 3));
    }
  }
}
