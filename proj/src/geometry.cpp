#include "padicprep/geometry.hpp"

#include <algorithm>
#include <set>

namespace padicprep {

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

std::optional<std::int64_t> ord_exact(const Rational& x, std::uint64_t p) {
  if (x == 0) return std::nullopt;
  return ord_p(x, p);
}

std::uint64_t ac_exact(const Rational& x, std::uint64_t p, int m) {
  if (x == 0) return 0;
  FieldContext ctx{p, p, m};
  return from_rational(x, ctx).unit();
}

RVElement rv_exact(const Rational& x, std::uint64_t p, int n) {
  if (x == 0) return RVElement::make_zero(p, n);
  FieldContext ctx{p, p, n};
  PadicNumber v = from_rational(x, ctx);
  return {false, v.valuation(), v.unit(), n, p};
}

bool Ball::contains(const Rational& t, std::uint64_t p) const {
  auto o = ord_exact(t - center, p);
  return !o || *o >= radius;
}

Cell Cell::point(const Rational& c) { return Cell{c, Rational(0), 1, 1, std::nullopt, std::nullopt}; }

Cell Cell::annulus(const Rational& c, const Rational& lambda, int m, int n, std::optional<std::int64_t> ord_min,
                   std::optional<std::int64_t> ord_max, std::uint64_t p) {
  Cell A{c, lambda, m, n, std::nullopt, std::nullopt};
  if (ord_max) A.alpha = pow_p(p, *ord_max + 1);
  if (ord_min) A.beta = pow_p(p, *ord_min - 1);
  return A;
}

std::optional<std::int64_t> Cell::ord_min(std::uint64_t p) const {
  if (!beta) return std::nullopt;
  return ord_p(*beta, p) + 1;
}

std::optional<std::int64_t> Cell::ord_max(std::uint64_t p) const {
  if (!alpha) return std::nullopt;
  return ord_p(*alpha, p) - 1;
}

void validate_cell(const Cell& A, std::uint64_t p) {
  if (A.m < 1 || A.n < 1) throw PreconditionError("coset levels must be positive");
  if ((A.alpha && *A.alpha == 0) || (A.beta && *A.beta == 0))
    throw PreconditionError("cell boundaries must be nonzero");
  if (A.is_point()) return;
  auto lo = A.ord_min(p);
  auto hi = A.ord_max(p);
  if (lo && hi) {
    std::int64_t base = ord_p(A.lambda, p);
    std::int64_t first = *lo + floor_mod(base - *lo, A.n);
    if (first > *hi) throw PreconditionError("cell is empty: no valuation satisfies the bounds and the coset");
  }
}

bool cell_contains(const Cell& A, const Rational& t, std::uint64_t p) {
  Rational s = t - A.center;
  if (A.is_point()) return s == 0;
  if (s == 0) return false;
  std::int64_t o = ord_p(s, p);
  if (auto lo = A.ord_min(p); lo && o < *lo) return false;
  if (auto hi = A.ord_max(p); hi && o > *hi) return false;
  if (floor_mod(o - ord_p(A.lambda, p), A.n) != 0) return false;
  return ac_exact(s, p, A.m) == ac_exact(A.lambda, p, A.m);
}

Ball ball_of_cell_at(const Cell& A, const Rational& t, std::uint64_t p) {
  if (A.is_point()) throw PreconditionError("balls of a 0-cell are not defined");
  if (!cell_contains(A, t, p)) throw PreconditionError("point " + to_string(t) + " is not in the cell");
  const std::int64_t o = ord_p(t - A.center, p);
  // Balls B(t, R) with R <= o contain the center. For R > o every point s of
  // B(t, R) has ord(s - c) = o and shares ac_{R-o}(s - c) with t, so
  // B(t, R) lies in A exactly when ac_m is pinned, i.e. R - o >= m.
  return Ball{t, o + A.m};
}

std::vector<Rational> window_points(const Window& W, std::uint64_t p) {
  if (W.unit_level < 1) throw PreconditionError("window unit level must be positive");
  if (W.v_min > W.v_max) throw PreconditionError("empty window valuation range");
  std::vector<Rational> out;
  const std::uint64_t top = ipow(p, W.unit_level);
  for (std::int64_t v = W.v_min; v <= W.v_max; ++v) {
    Rational pv = pow_p(p, v);
    for (std::uint64_t u = 1; u < top; ++u)
      if (u % p != 0) out.push_back(pv * static_cast<unsigned long>(u));
  }
  if (W.include_zero) out.push_back(Rational(0));
  return out;
}

std::vector<Rational> enumerate_points(const Cell& A, const std::vector<Rational>& points, std::uint64_t p) {
  std::vector<Rational> out;
  for (const auto& t : points)
    if (cell_contains(A, t, p)) out.push_back(t);
  return out;
}

std::vector<Rational> enumerate_points(const Cell& A, const Window& W, std::uint64_t p) {
  return enumerate_points(A, window_points(W, p), p);
}

WindowIndex::WindowIndex(const Window& W, std::uint64_t p) : W_(W), p_(p), points_(window_points(W, p)) {
  level_ = W.unit_level + static_cast<int>(W.v_max - W.v_min) + 6;
  while (level_ > 1) {
    unsigned __int128 v = 1;
    for (int i = 0; i < level_; ++i) v *= p;
    if (v < (static_cast<unsigned __int128>(1) << 62)) break;
    --level_;
  }
}

const WindowIndex::Table& WindowIndex::table(const Rational& c) const {
  auto it = tables_.find(c);
  if (it != tables_.end()) return it->second;
  Table T;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    Rational s = points_[i] - c;
    if (s == 0) {
      T.at_center = i;
      continue;
    }
    T.buckets[ord_p(s, p_)].push_back({i, ac_exact(s, p_, level_)});
  }
  return tables_.emplace(c, std::move(T)).first->second;
}

std::vector<Rational> WindowIndex::in_cell(const Cell& A) const {
  const Table& T = table(A.center);
  std::vector<std::size_t> idx;
  if (A.is_point()) {
    if (T.at_center) idx.push_back(*T.at_center);
  } else {
    auto lo = A.ord_min(p_), hi = A.ord_max(p_);
    const std::int64_t lam = ord_p(A.lambda, p_);
    const bool fast = A.m <= level_;
    const std::uint64_t want = fast ? ac_exact(A.lambda, p_, A.m) : 0;
    const std::uint64_t mod = ipow(p_, std::min(A.m, level_));
    for (const auto& [r, entries] : T.buckets) {
      if ((lo && r < *lo) || (hi && r > *hi) || floor_mod(r - lam, A.n) != 0) continue;
      for (const auto& e : entries)
        if (fast ? e.unit % mod == want : cell_contains(A, points_[e.point], p_)) idx.push_back(e.point);
    }
    std::sort(idx.begin(), idx.end());
  }
  std::vector<Rational> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(points_[i]);
  return out;
}

std::optional<std::pair<std::int64_t, std::int64_t>> WindowIndex::hull(const Rational& c) const {
  const Table& T = table(c);
  if (T.buckets.empty()) return std::nullopt;
  return std::make_pair(T.buckets.begin()->first, T.buckets.rbegin()->first);
}

bool is_thin_syntactic(const Cell& A, std::uint64_t p) {
  if (A.is_point()) return true;
  auto lo = A.ord_min(p);
  auto hi = A.ord_max(p);
  if (!lo || !hi) return false;
  std::int64_t base = ord_p(A.lambda, p);
  std::int64_t first = *lo + floor_mod(base - *lo, A.n);
  return first <= *hi && first + A.n > *hi;
}

bool is_thin(const Cell& A, const Window& W, std::uint64_t p) {
  bool thin = is_thin_syntactic(A, p);
  if (A.is_point()) return thin;
  std::set<std::pair<Rational, std::int64_t>> balls;
  for (const auto& t : enumerate_points(A, W, p)) {
    Ball b = ball_of_cell_at(A, t, p);
    bool seen = false;
    for (const auto& [c, r] : balls)
      if (r == b.radius && Ball{c, r}.contains(t, p)) seen = true;
    if (!seen) balls.insert({b.center, b.radius});
  }
  if (thin && balls.size() > 1) throw Error("thin-cell audit: syntactically thin cell shows several balls on the window");
  return thin;
}

FractionalMonomial FractionalMonomial::integral(const Rational& center, const Rational& coefficient, std::int64_t a) {
  FractionalMonomial m;
  m.center = center;
  m.coefficient = coefficient;
  m.a = coefficient == 0 ? 0 : a;
  m.b = 1;
  return m;
}

FractionalMonomial FractionalMonomial::constant(const Rational& value) {
  return integral(Rational(0), value, 0);
}

namespace {

Rational rational_power(const Rational& x, std::int64_t e) {
  if (e == 0) return Rational(1);  // 0^0 = 1
  if (x == 0) return Rational(0);  // includes 0^{-k} = 0 by the inverse convention
  Rational base = e > 0 ? x : Rational(1) / x;
  std::int64_t k = e > 0 ? e : -e;
  Rational r = 1;
  for (std::int64_t i = 0; i < k; ++i) r *= base;
  return r;
}

}  // namespace

std::optional<Rational> monomial_exact(const FractionalMonomial& m, const Rational& t) {
  if (m.b != 1) return std::nullopt;
  return m.coefficient * rational_power(t - m.center, m.a);
}

PadicNumber monomial_eval(const FractionalMonomial& m, const Rational& t, const FieldContext& ctx) {
  if (m.b < 1) throw PreconditionError("monomial denominator must be positive");
  Rational power = m.coefficient * rational_power(t - m.center, m.a);
  if (m.b == 1) return from_rational(power, ctx);
  if (power == 0) return PadicNumber::zero(ctx);
  PadicNumber y = from_rational(power, ctx);
  if (y.valuation() % m.b != 0) throw Error("monomial value has valuation not divisible by b");
  auto root = hensel_root(y, static_cast<std::uint64_t>(m.b), {m.branch.ac, m.branch.level});
  if (!root) throw Error("monomial branch is inconsistent with the value at " + to_string(t));
  return *root;
}

RVElement monomial_derivative_rv(const FractionalMonomial& m, const Rational& t, int n, const FieldContext& ctx) {
  if (m.a == 0 || m.coefficient == 0) return RVElement::make_zero(ctx.p, n);
  if (t == m.center) throw PreconditionError("monomial derivative at its center");
  Rational factor = Rational(m.a, m.b) / (t - m.center);
  factor.canonicalize();
  if (m.b == 1) return rv_exact(*monomial_exact(m, t) * factor, ctx.p, n);
  PadicNumber d = mul(monomial_eval(m, t, ctx), from_rational(factor, ctx));
  return rv(d, n);
}

}  // namespace padicprep
