#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "padicprep/geometry.hpp"
#include "padicprep/prepare.hpp"

using namespace padicprep;

namespace {

// Cell of units congruent to 1 mod 3: ord(t) = 0, ac_1(t) = 1.
Cell one_plus_3z() { return Cell::annulus(0, 1, 1, 1, 0, 0, 3); }

bool ball_inside(const Ball& B, const Cell& A, unsigned long p) {
  for (const auto& t : oracle::window(-3, 6, 3, p)) {
    mpq_class s = B.center + t;
    if (B.contains(s, p) && !cell_contains(A, s, p)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("cell_contains examples") {
  auto A = Cell::annulus(0, 1, 1, 2, std::nullopt, std::nullopt, 3);
  CHECK(cell_contains(A, 9, 3));
  CHECK(!cell_contains(A, 3, 3));
  auto P = Cell::point(5);
  CHECK(cell_contains(P, 5, 3));
  CHECK(!cell_contains(P, 8, 3));
}

TEST_CASE("ball_of_cell_at is maximal") {
  auto A = one_plus_3z();
  auto B = ball_of_cell_at(A, 1, 3);
  CHECK(B.contains(1, 3));
  CHECK(B.radius == 1);
  CHECK(ball_inside(B, A, 3));
  CHECK(!ball_inside(Ball{B.center, B.radius - 1}, A, 3));

  auto Z = Cell::annulus(0, 1, 1, 1, 0, std::nullopt, 3);
  // Z = {ord t >= 0, ac_1 = 1}; at t = 3 use the cell with lambda = 3.
  auto Z3 = Cell::annulus(0, 3, 1, 1, 0, std::nullopt, 3);
  auto B3 = ball_of_cell_at(Z3, 3, 3);
  CHECK(B3.radius == 2);
  CHECK(B3.contains(3, 3));
  CHECK(ball_inside(B3, Z3, 3));
  CHECK(!ball_inside(Ball{B3.center, B3.radius - 1}, Z3, 3));
  CHECK(ball_of_cell_at(Z, 1, 3).radius == 1);
}

TEST_CASE("is_thin examples") {
  auto W = Window::defaults_for_level(1);
  CHECK(is_thin(Cell::point(2), W, 3));
  CHECK(!is_thin(Cell::annulus(0, 1, 1, 1, std::nullopt, std::nullopt, 3), W, 3));
  CHECK(is_thin(one_plus_3z(), W, 3));
}

TEST_CASE("enumerate_points examples") {
  Window W{0, 0, 2, false};
  auto units = Cell::annulus(0, 1, 1, 1, 0, 0, 3);
  auto units2 = Cell::annulus(0, 2, 1, 1, 0, 0, 3);
  auto a = enumerate_points(units, W, 3);
  auto b = enumerate_points(units2, W, 3);
  std::vector<mpq_class> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<mpq_class> expect{1, 2, 4, 5, 7, 8};
  CHECK(all == expect);
  Window W2{0, 1, 2, false};
  auto pt = enumerate_points(Cell::point(2), W2, 3);
  REQUIRE(pt.size() == 1);
  CHECK(pt[0] == 2);
}

TEST_CASE("property: window cells partition the window") {
  unsigned long p = 3;
  Window W{-2, 2, 3, true};
  auto pts = window_points(W, p);
  CHECK(pts.size() == oracle::window(-2, 2, 3, p, true).size());
  std::vector<Cell> parts{Cell::point(0)};
  for (std::uint64_t r = 1; r < 9; ++r) {
    if (r % 3 == 0) continue;
    parts.push_back(Cell::annulus(0, mpq_class(r), 2, 1, std::nullopt, std::nullopt, p));
  }
  std::size_t total = 0;
  for (const auto& A : parts) total += enumerate_points(A, W, p).size();
  CHECK(total == pts.size());
  WindowIndex idx(W, p);
  for (const auto& A : parts) CHECK(idx.in_cell(A) == enumerate_points(A, W, p));
  auto shifted = Cell::annulus(1, 2, 1, 2, -1, 1, p);
  CHECK(idx.in_cell(shifted) == enumerate_points(shifted, W, p));
}

TEST_CASE("monomial evaluation") {
  auto c5 = FieldContext::make(5, 8);
  auto c3 = FieldContext::make(3, 8);
  auto sq = FractionalMonomial::integral(0, 1, 2);
  CHECK(*monomial_exact(sq, 3) == 9);
  CHECK(*monomial_exact(FractionalMonomial::constant(7), 0) == 7);
  CHECK(monomial_eval(sq, 3, c5) == from_rational(9, 1, c5));

  FractionalMonomial root{0, 1, 1, 2, rv_exact(2, 3, 1)};
  auto r = monomial_eval(root, 4, c3);
  CHECK(mul(r, r) == from_rational(4, 1, c3));
  CHECK(ac(r, 1) == 2);
}

TEST_CASE("monomial derivative rv") {
  auto c5 = FieldContext::make(5, 8);
  auto c3 = FieldContext::make(3, 8);
  auto sq = FractionalMonomial::integral(0, 1, 2);
  CHECK(monomial_derivative_rv(sq, 3, 1, c5) == rv_exact(6, 5, 1));
  auto id = FractionalMonomial::integral(0, 1, 1);
  CHECK(monomial_derivative_rv(id, 7, 2, c5) == rv_exact(1, 5, 2));
  FractionalMonomial root{0, 1, 1, 2, rv_exact(2, 3, 1)};
  // The branch value at 4 is the root of T^2 = 4 with ac_1 = 2, i.e. 2.
  CHECK(monomial_derivative_rv(root, 4, 1, c3) == rv_exact(mpq_class(1, 4), 3, 1));
}

TEST_CASE("square-root branch through -2 gives derivative rv of -1/4") {
  auto c3 = FieldContext::make(3, 8);
  FractionalMonomial root{0, 1, 1, 2, rv_exact(1, 3, 1)};
  auto r = monomial_eval(root, 4, c3);
  CHECK(r == from_rational(-2, 1, c3));
  CHECK(monomial_derivative_rv(root, 4, 1, c3) == rv_exact(mpq_class(-1, 4), 3, 1));
}
