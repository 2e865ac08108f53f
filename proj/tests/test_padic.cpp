#include <doctest.h>

#include "oracles.hpp"
#include "padicprep/padic.hpp"

using namespace padicprep;

TEST_CASE("from_rational examples") {
  auto c5 = FieldContext::make(5, 3);
  auto x = from_rational(50, 1, c5);
  CHECK(x.valuation() == 2);
  CHECK(x.unit() == 2);
  CHECK(from_rational(0, 7, c5).is_zero());
  CHECK(!ord(from_rational(0, 7, c5)));

  auto c3 = FieldContext::make(3, 2);
  auto y = from_rational(1, -4, c3);
  CHECK(y.valuation() == 0);
  CHECK(y.unit() % 3 == 2);
  CHECK(y.unit() == oracle::unit_mod(mpq_class(-1, 4), 3, 2));
}

TEST_CASE("arithmetic examples") {
  auto c5 = FieldContext::make(5, 3);
  auto p = from_rational(5, 1, c5);
  auto pp = mul(p, p);
  CHECK(pp.valuation() == 2);
  CHECK(pp.unit() == 1);
  CHECK(inv(PadicNumber::zero(c5)).is_zero());
  auto s = add(from_rational(1, 1, c5), from_rational(-1, 1, c5));
  CHECK(s.is_zero());
  CHECK(s.cancelled());
}

TEST_CASE("ord, norm, ac, rv examples") {
  auto c5 = FieldContext::make(5, 8);
  auto c3 = FieldContext::make(3, 8);
  CHECK(*ord(from_rational(50, 1, c5)) == 2);
  CHECK(norm(from_rational(50, 1, c5)) == mpq_class(1, 25));
  CHECK(!ord(PadicNumber::zero(c5)));
  CHECK(norm(PadicNumber::zero(c5)) == 0);
  CHECK(*ord(mul(from_rational(6, 1, c3), from_rational(9, 1, c3))) == 3);
  CHECK(ac(from_rational(18, 1, c3), 1) == 2);
  CHECK(ac(PadicNumber::zero(c3), 2) == 0);
  auto x = from_rational(2, 1, c5), y = from_rational(10, 1, c5);
  CHECK(rv(x, 2) * rv(y, 2) == rv(mul(x, y), 2));
}

TEST_CASE("Q_{m,n} membership examples") {
  auto c3 = FieldContext::make(3, 8);
  CHECK(in_Qmn(from_rational(9, 1, c3), 1, 2));
  CHECK(!in_Qmn(from_rational(3, 1, c3), 1, 2));
  CHECK(coset_member(from_rational(6, 1, c3), from_rational(2, 1, c3), 1, 1));
}

TEST_CASE("nth powers and Hensel roots") {
  auto c7 = FieldContext::make(7, 8);
  auto c3 = FieldContext::make(3, 8);
  auto c5 = FieldContext::make(5, 8);
  CHECK(is_nth_power(from_rational(4, 1, c7), 2));
  CHECK(!is_nth_power(from_rational(7, 1, c7), 2));
  CHECK(is_nth_power(from_rational(7, 1, c3), 2));

  auto r = hensel_root(from_rational(7, 1, c3), 2, {1, 1});
  REQUIRE(r);
  CHECK(r->unit() % 9 == 4);
  auto r1 = hensel_root(from_rational(1, 1, c5), 3, {1, 1});
  REQUIRE(r1);
  CHECK(*r1 == from_rational(1, 1, c5));
  CHECK(!hensel_root(from_rational(3, 1, c3), 2, {1, 1}));
}

TEST_CASE("property: ultrametric, multiplicativity and precision soundness") {
  for (unsigned long p : {2ul, 3ul, 5ul}) {
    auto ctx = FieldContext::make(p, 8);
    auto pts = oracle::window(-1, 1, 2, p);
    for (const auto& a : pts) {
      for (const auto& b : pts) {
        auto x = from_rational(a, ctx), y = from_rational(b, ctx);
        auto s = add(x, y);
        if (a + b != 0) {
          CHECK(*ord(s) == *oracle::val(mpq_class(a + b), p));
          CHECK(*ord(s) >= std::min(*ord(x), *ord(y)));
          // Digits known for the sum agree with the exact sum.
          int known = s.precision();
          CHECK(s.unit() % ipow(p, known) == oracle::unit_mod(a + b, p, known));
        }
        auto m = mul(x, y);
        CHECK(*ord(m) == *ord(x) + *ord(y));
        for (int k = 1; k <= 3; ++k) {
          CHECK(ac(m, k) == mul_mod(ac(x, k), ac(y, k), ipow(p, k)));
          CHECK(rv(m, k) == rv(x, k) * rv(y, k));
        }
        CHECK(m.unit() == oracle::unit_mod(a * b, p, m.precision()));
      }
    }
  }
}

TEST_CASE("property: in_Qmn agrees with the digit oracle") {
  for (unsigned long p : {2ul, 3ul, 5ul}) {
    auto ctx = FieldContext::make(p, 8);
    for (const auto& a : oracle::window(-3, 3, 3, p)) {
      auto x = from_rational(a, ctx);
      for (int m = 1; m <= 2; ++m) {
        for (int n = 1; n <= 3; ++n) {
          bool expect = *oracle::val(a, p) % n == 0 && oracle::unit_mod(a, p, m) == 1;
          CHECK(in_Qmn(x, m, n) == expect);
        }
      }
    }
  }
}
