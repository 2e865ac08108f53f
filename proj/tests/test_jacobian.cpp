#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "padicprep/jacobian.hpp"

using namespace padicprep;

namespace {

struct RV {
  bool zero;
  long v;
  std::uint64_t u;
  bool operator==(const RV&) const = default;
};

RV rv_of(const mpq_class& x, unsigned long p, int n) {
  if (x == 0) return {true, 0, 0};
  return {false, *oracle::val(x, p), n == 0 ? 0 : oracle::unit_mod(x, p, n)};
}

RV rv_mul(const RV& a, const RV& b, unsigned long p, int n) {
  if (a.zero || b.zero) return {true, 0, 0};
  std::uint64_t m = oracle::ppow(p, n).get_ui();
  return {false, a.v + b.v, n == 0 ? 0 : (a.u * b.u) % m};
}

// Naive double loop: injective, constant rv_n(f'), the rv_n identity on
// every pair, and images inside the predicted ball.
bool oracle_n_jacobian(const char* body, const mpq_class& c, long r, int n, const Window& W, unsigned long p) {
  auto e = parse_expr(body);
  auto de = differentiate(e);
  std::set<mpq_class> pts;
  for (const auto& x : oracle::window(W.v_min, W.v_max, W.unit_level, p)) {
    mpq_class d = x - c;
    if (d == 0 || *oracle::val(d, p) >= r) {
      pts.insert(x);
      pts.insert(2 * c - x);
    }
  }
  std::vector<mpq_class> xs(pts.begin(), pts.end()), fx, dx;
  for (const auto& x : xs) {
    fx.push_back(eval_exact(e, x));
    dx.push_back(eval_exact(de, x));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (dx[i] == 0) return false;
    if (!(rv_of(dx[i], p, n) == rv_of(dx[0], p, n))) return false;
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      if (fx[i] == fx[j]) return false;
      if (!(rv_mul(rv_of(dx[i], p, n), rv_of(xs[i] - xs[j], p, n), p, n) == rv_of(fx[i] - fx[j], p, n)))
        return false;
    }
  }
  long R = *oracle::val(dx[0], p) + r;
  mpq_class fc = eval_exact(e, c);
  for (const auto& y : fx)
    if (y != fc && *oracle::val(y - fc, p) < R) return false;
  return true;
}

PiecewiseFunction fn(const char* body) { return parse(std::string(body) + " on {all}"); }

}  // namespace

TEST_CASE("check_jacobian examples") {
  auto ctx = FieldContext::make(3, 12);
  Window W{-3, 3, 4, false};
  CHECK(check_jacobian(fn("t^2"), Ball{1, 1}, W, ctx).pass);
  auto bad = check_jacobian(fn("t^2"), Ball{0, 0}, W, ctx);
  REQUIRE(!bad.pass);
  REQUIRE(bad.counterexample);
  CHECK(bad.counterexample->x == 1);
  CHECK(bad.counterexample->y == -1);
  CHECK(bad.counterexample->condition == "injective");
  CHECK(check_jacobian(fn("3*t + 1"), Ball{0, 0}, W, ctx).pass);
}

TEST_CASE("check_n_jacobian examples") {
  auto ctx = FieldContext::make(3, 12);
  Window W{-3, 3, 5, false};
  CHECK(check_n_jacobian(fn("t^2"), Ball{1, 2}, 1, W, ctx).pass);
  auto r = check_n_jacobian(fn("t^2"), Ball{1, 1}, 2, W, ctx);
  CHECK(!r.pass);
  CHECK(r.counterexample->condition == "c");
  CHECK(r.pass == oracle_n_jacobian("t^2", 1, 1, 2, W, 3));
}

TEST_CASE("property: checker verdicts agree with the naive oracle") {
  struct Case {
    const char* body;
    long c;
    long r;
  };
  std::vector<Case> cases{{"t^2", 1, 1}, {"t^2", 0, 0}, {"t^2", 1, 2}, {"3*t + 1", 0, 0},  {"t^3 - t", 0, 1},
                          {"t^3 - t", 2, 1}, {"t^3", 1, 1}, {"t + 9*t^2", 0, 0}, {"inv(t)", 1, 1}, {"t^2 + t", 1, 1},
                          {"t^4", 2, 2}, {"5*t", 0, 1}};
  Window W{-1, 2, 3, false};
  for (unsigned long p : {2ul, 3ul, 5ul}) {
    auto ctx = FieldContext::make(p, 12);
    for (const auto& k : cases) {
      for (int n = 0; n <= 2; ++n) {
        CAPTURE(p);
        CAPTURE(k.body);
        CAPTURE(k.c);
        CAPTURE(k.r);
        CAPTURE(n);
        auto rep = check_n_jacobian(fn(k.body), Ball{k.c, k.r}, n, W, ctx);
        CHECK(rep.pass == oracle_n_jacobian(k.body, k.c, k.r, n, W, p));
        if (!rep.pass) {
          REQUIRE(rep.counterexample);
          if (rep.counterexample->condition == "d") CHECK(rep.counterexample->x != rep.counterexample->y);
        }
      }
    }
  }
}

TEST_CASE("property: level 0 is the plain Jacobian property and levels are monotone") {
  auto ctx = FieldContext::make(3, 12);
  Window W{-2, 3, 4, false};
  for (const char* body : {"t^2", "t^3 - t", "3*t + 1", "t + 3*t^2", "inv(t)"}) {
    for (long c : {0, 1, 2}) {
      for (long r : {0, 1, 2}) {
        if (std::string(body) == "inv(t)" && (c == 0 || r == 0)) continue;
        auto j = check_jacobian(fn(body), Ball{c, r}, W, ctx);
        auto j0 = check_n_jacobian(fn(body), Ball{c, r}, 0, W, ctx);
        CHECK(j.pass == j0.pass);
        bool higher = true;
        for (int n = 2; n >= 0; --n) {
          bool now = check_n_jacobian(fn(body), Ball{c, r}, n, W, ctx).pass;
          if (higher && n < 2) CHECK(now);
          higher = now;
        }
      }
    }
  }
}

TEST_CASE("check_n_compatible examples") {
  auto ctx = FieldContext::make(3, 12);
  Window W{-3, 3, 4, false};
  auto A = Cell::annulus(0, 1, 2, 1, std::nullopt, std::nullopt, 3);
  auto id = check_n_compatible(fn("t"), A, 1, W, ctx);
  CHECK(id.report.pass);
  REQUIRE(id.image);
  CHECK(!id.image->point);
  for (const auto& t : oracle::window(-3, 3, 4, 3))
    CHECK(cell_contains(id.image->as_cell(3), t, 3) == cell_contains(A, t, 3));

  auto five = check_n_compatible(fn("5"), A, 1, W, ctx);
  CHECK(five.report.pass);
  REQUIRE(five.image);
  CHECK(five.image->point);
  CHECK(five.image->center == 5);

  // One ball, 1 + 3Z_3; the oracle runs the ball check directly.
  auto U = Cell::annulus(0, 1, 1, 1, 0, 0, 3);
  auto sq = check_n_compatible(fn("t^2"), U, 1, W, ctx);
  CHECK(sq.report.pass == oracle_n_jacobian("t^2", 1, 1, 1, W, 3));
}

TEST_CASE("check_n_equicompatible examples") {
  Window W{-3, 3, 4, false};
  auto A = Cell::annulus(0, 1, 1, 1, 0, std::nullopt, 3);
  auto c3 = FieldContext::make(3, 12);
  CHECK(check_n_equicompatible(fn("t^2 + 1"), fn("t^2 + 1"), A, 1, W, c3).report.pass);

  auto near = check_n_equicompatible(fn("t"), fn("t + 9*t"), A, 1, W, c3);
  REQUIRE(near.f.image);
  REQUIRE(near.g.image);
  CHECK(near.report.pass == (*near.f.image == *near.g.image));
  if (!near.report.pass) CHECK(near.report.counterexample->condition != "derivative");

  auto c5 = FieldContext::make(5, 12);
  auto A5 = Cell::annulus(0, 1, 1, 1, 0, std::nullopt, 5);
  auto two = check_n_equicompatible(fn("t"), fn("2*t"), A5, 1, W, c5);
  CHECK(!two.report.pass);
  CHECK(two.report.counterexample->condition == "derivative");
}

TEST_CASE("banach_fixed_point examples") {
  auto c3 = FieldContext::make(3, 16);
  Window W{-2, 3, 4, false};
  auto r = banach_fixed_point(fn("3*t + 1"), Ball{0, 0}, 8, W, c3);
  REQUIRE(r.ok);
  CHECK(r.iterations <= 9);
  CHECK(oracle::congruent(r.value, mpq_class(-1, 2), 3, 8));
  CHECK(oracle::unit_mod(r.value, 3, 1) == 1);
  REQUIRE(r.exact);
  CHECK(*r.exact == mpq_class(-1, 2));

  auto c5 = FieldContext::make(5, 16);
  auto z = banach_fixed_point(fn("5*t"), Ball{0, 0}, 8, W, c5);
  REQUIRE(z.ok);
  CHECK(z.value == 0);

  auto bad = banach_fixed_point(fn("t + 1"), Ball{0, 0}, 8, W, c3);
  CHECK(!bad.ok);
  CHECK(bad.failure == "contraction");
  CHECK(bad.witness);
}

TEST_CASE("property: fixed points are unique on the window") {
  auto c3 = FieldContext::make(3, 16);
  Window W{0, 3, 4, true};
  for (const char* body : {"3*t + 1", "9*t^2 + 3*t - 2", "3*t^3 + 1"}) {
    auto f = fn(body);
    auto r = banach_fixed_point(f, Ball{0, 0}, 10, W, c3);
    REQUIRE(r.ok);
    mpq_class res = eval_exact(f, r.value, 3) - r.value;
    CHECK((res == 0 || *oracle::val(res, 3) >= 10));
    for (const auto& x : oracle::window(0, 3, 4, 3)) {
      mpq_class g = eval_exact(f, x, 3) - x;
      if (g == 0 || *oracle::val(g, 3) >= W.unit_level) CHECK(oracle::congruent(x, r.value, 3, W.unit_level - 1));
    }
  }
}

TEST_CASE("solve_equal_point examples") {
  auto c3 = FieldContext::make(3, 16);
  Window W{-2, 3, 4, false};
  auto a = solve_equal_point(fn("t"), fn("3*t + 1"), Ball{0, 0}, 8, W, c3);
  REQUIRE(a.ok);
  REQUIRE(a.exact);
  CHECK(*a.exact == mpq_class(-1, 2));
  auto b = solve_equal_point(fn("t"), fn("3*t"), Ball{0, 0}, 8, W, c3);
  REQUIRE(b.ok);
  CHECK(b.value == 0);
  auto c = solve_equal_point(fn("t + 1"), fn("3*t + 2"), Ball{0, 0}, 8, W, c3);
  REQUIRE(c.ok);
  REQUIRE(c.exact);
  CHECK(*c.exact == mpq_class(-1, 2));
  CHECK(eval_exact(fn("t + 1"), *c.exact, 3) == mpq_class(1, 2));
  CHECK(eval_exact(fn("3*t + 2"), *c.exact, 3) == mpq_class(1, 2));
}

TEST_CASE("solve_equal_rv_point examples") {
  auto c3 = FieldContext::make(3, 16);
  Window W{1, 4, 4, true};
  auto a = solve_equal_rv_point(fn("t"), fn("4*t"), Ball{0, 1}, 2, 8, W, c3);
  REQUIRE(a.ok);
  CHECK(a.value == 0);
  auto b = solve_equal_rv_point(fn("t + 9"), fn("4*t + 9"), Ball{0, 1}, 2, 8, W, c3);
  REQUIRE(b.ok);
  CHECK(b.value == 0);
  auto same = solve_equal_rv_point(fn("t"), fn("t + 27*t"), Ball{0, 1}, 2, 8, W, c3);
  CHECK(!same.ok);
  CHECK(same.failure == "distinct-derivative-rv");
}

TEST_CASE("rational reconstruction") {
  mpz_class mod = oracle::ppow(3, 12);
  mpz_class inv2;
  mpz_class two = 2;
  mpz_invert(inv2.get_mpz_t(), two.get_mpz_t(), mod.get_mpz_t());
  mpq_class x(mod - inv2);
  auto r = rational_reconstruction(x, 3, 12);
  REQUIRE(r);
  CHECK(*r == mpq_class(-1, 2));
}
