#include "padicprep/poly.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace padicprep {

Poly::Poly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Poly Poly::constant(const Rational& c) { return Poly({c}); }
Poly Poly::identity() { return Poly({Rational(0), Rational(1)}); }

void Poly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational Poly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(coeffs_.size())) return Rational(0);
  return coeffs_[i];
}

Rational Poly::leading() const { return coeffs_.empty() ? Rational(0) : coeffs_.back(); }

Rational Poly::eval(const Rational& t) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Poly Poly::derivative() const {
  std::vector<Rational> d;
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d.push_back(coeffs_[i] * static_cast<long>(i));
  return Poly(std::move(d));
}

Poly Poly::taylor_at(const Rational& c) const {
  // repeated synthetic division by (t - c)
  std::vector<Rational> work = coeffs_;
  const std::size_t n = work.size();
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t i = n - 1; i > k; --i) work[i - 1] += c * work[i];
  return Poly(std::move(work));
}

Poly Poly::scaled(const Rational& scale) const {
  std::vector<Rational> out = coeffs_;
  Rational f = 1;
  for (auto& c : out) {
    c *= f;
    f *= scale;
  }
  return Poly(std::move(out));
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Rational> out(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
  return Poly(std::move(out));
}

Poly operator-(const Poly& a, const Poly& b) { return a + Rational(-1) * b; }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Poly(std::move(out));
}

Poly operator*(const Rational& k, const Poly& b) {
  std::vector<Rational> out = b.coeffs_;
  for (auto& c : out) c *= k;
  return Poly(std::move(out));
}

void Poly::divmod(const Poly& d, Poly& q, Poly& r) const {
  if (d.is_zero()) throw PreconditionError("polynomial division by zero");
  std::vector<Rational> rem = coeffs_;
  std::vector<Rational> quo(std::max(0, degree() - d.degree() + 1));
  for (int i = degree(); i >= d.degree(); --i) {
    if (rem[i] == 0) continue;
    Rational f = rem[i] / d.leading();
    quo[i - d.degree()] = f;
    for (int j = 0; j <= d.degree(); ++j) rem[i - d.degree() + j] -= f * d.coeffs_[j];
  }
  q = Poly(std::move(quo));
  r = Poly(std::move(rem));
}

Poly Poly::monic() const {
  if (is_zero()) return *this;
  return Rational(1) / leading() * *this;
}

Poly gcd(const Poly& a, const Poly& b) {
  Poly x = a, y = b;
  while (!y.is_zero()) {
    Poly q, r;
    x.divmod(y, q, r);
    x = y;
    y = r;
  }
  return x.monic();
}

Poly squarefree_part(const Poly& f) {
  if (f.degree() <= 0) return f.monic();
  Poly g = gcd(f, f.derivative());
  Poly q, r;
  f.divmod(g, q, r);
  return q.monic();
}

namespace {

std::vector<Integer> positive_divisors(Integer n) {
  if (n < 0) n = -n;
  std::vector<Integer> out;
  if (n == 0) return out;
  // Trial division is fine for the coefficient sizes this toolkit parses.
  if (n > Integer("1000000000000")) return out;
  for (Integer d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  return out;
}

std::vector<Integer> integer_coefficients(const Poly& f) {
  Integer l = 1;
  for (const auto& c : f.coeffs()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den().get_mpz_t());
  std::vector<Integer> out;
  for (const auto& c : f.coeffs()) out.push_back(Integer(c * l));
  return out;
}

int weierstrass_degree(const Poly& taylor, std::uint64_t p, std::int64_t radius) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  int deg = -1;
  for (int j = 0; j <= taylor.degree(); ++j) {
    if (taylor.coeff(j) == 0) continue;
    std::int64_t o = ord_p(taylor.coeff(j), p) + radius * j;
    if (o <= best) {
      best = o;
      deg = j;
    }
  }
  return deg;
}

void roots_in_ball(const Poly& f, std::uint64_t p, const Rational& a, std::int64_t z, std::int64_t stop,
                   std::vector<Rational>& out) {
  int w = weierstrass_degree(f.taylor_at(a), p, z);
  if (w <= 0) return;
  if (z >= stop) {
    out.push_back(a);
    return;
  }
  Rational step = pow_p(p, z);
  for (std::uint64_t i = 0; i < p; ++i) roots_in_ball(f, p, a + step * static_cast<unsigned long>(i), z + 1, stop, out);
}

}  // namespace

std::vector<Rational> rational_roots(const Poly& f) {
  std::set<Rational> roots;
  if (f.degree() <= 0) return {};
  auto ic = integer_coefficients(f);
  std::size_t low = 0;
  while (low < ic.size() && ic[low] == 0) ++low;
  if (low > 0) roots.insert(Rational(0));
  Integer c0 = ic[low];
  Integer lead = ic.back();
  if (ic.size() - low > 1) {
    for (const auto& num : positive_divisors(c0))
      for (const auto& den : positive_divisors(lead))
        for (int sign : {1, -1}) {
          Rational cand(num * sign, den);
          cand.canonicalize();
          if (f.eval(cand) == 0) roots.insert(cand);
        }
  }
  return {roots.begin(), roots.end()};
}

std::vector<std::int64_t> newton_polygon_valuations(const Poly& f, std::uint64_t p) {
  std::vector<std::pair<int, std::int64_t>> pts;
  for (int j = 0; j <= f.degree(); ++j)
    if (f.coeff(j) != 0) pts.emplace_back(j, ord_p(f.coeff(j), p));
  // lower convex hull
  std::vector<std::pair<int, std::int64_t>> hull;
  for (const auto& pt : pts) {
    while (hull.size() >= 2) {
      auto [x1, y1] = hull[hull.size() - 2];
      auto [x2, y2] = hull.back();
      // remove middle point if it lies on or above the segment
      if ((y2 - y1) * (pt.first - x1) >= (pt.second - y1) * (x2 - x1))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(pt);
  }
  std::vector<std::int64_t> vals;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    std::int64_t dy = hull[i].second - hull[i - 1].second;
    std::int64_t dx = hull[i].first - hull[i - 1].first;
    if (dy % dx == 0) vals.push_back(-dy / dx);
  }
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals;
}

std::vector<Rational> qp_root_approximations(const Poly& f, std::uint64_t p, int digits) {
  if (f.degree() <= 0) return {};
  std::vector<Rational> exact = rational_roots(f);
  Poly rest = squarefree_part(f);
  for (const auto& r : exact) {
    Poly q, rem;
    rest.divmod(Poly({-r, Rational(1)}), q, rem);
    rest = q;
  }
  std::vector<Rational> out = exact;
  if (rest.degree() >= 1) {
    for (std::int64_t v : newton_polygon_valuations(rest, p)) {
      Rational pv = pow_p(p, v);
      for (std::uint64_t i = 1; i < p; ++i)
        roots_in_ball(rest, p, pv * static_cast<unsigned long>(i), v + 1, v + digits, out);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace padicprep
