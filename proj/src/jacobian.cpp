#include "padicprep/jacobian.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "residues.hpp"

namespace padicprep {

namespace {

using Index = std::size_t;
using namespace detail;

std::string rv_text(const Rational& x, std::uint64_t p, int n) { return rvq_string(rvq_exact(x, p, n), p, n); }

std::string ord_text(const Rational& x, std::uint64_t p) {
  return x == 0 ? std::string("+inf") : std::to_string(ord_p(x, p));
}

// Least pair (in sample order) with equal values.
std::optional<std::pair<Index, Index>> first_collision(const std::vector<Rational>& fx) {
  std::vector<Index> idx(fx.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return fx[a] < fx[b]; });
  std::optional<std::pair<Index, Index>> best;
  for (Index k = 0; k + 1 < idx.size(); ++k) {
    if (fx[idx[k]] != fx[idx[k + 1]]) continue;
    // stable sort keeps sample order inside a run: the first two are its least pair
    std::pair<Index, Index> cand{idx[k], idx[k + 1]};
    if (!best || cand < *best) best = cand;
    while (k + 1 < idx.size() && fx[idx[k]] == fx[idx[k + 1]]) ++k;
  }
  return best;
}

struct SampleData {
  std::vector<Rational> pts;
  std::vector<Rational> fx;
  std::vector<Rational> dfx;
};

SampleData evaluate(const PiecewiseFunction& f, const PiecewiseFunction& df, std::vector<Rational> pts,
                    std::uint64_t p) {
  SampleData s;
  s.pts = std::move(pts);
  for (const auto& t : s.pts) {
    s.fx.push_back(eval_exact(f, t, p));
    s.dfx.push_back(eval_exact(df, t, p));
  }
  return s;
}

// Injectivity, (c)/(c'), (d)/(d') and the residue-filling form of (a) on one
// ball B(a, z) sampled by s.
void jacobian_on_sample(PropertyReport& rep, const SampleData& s, const Rational& a, std::int64_t z,
                        const std::optional<Rational>& fa, int n, std::uint64_t p) {
  const Index N = s.pts.size();
  rep.checked_points += N;
  if (N == 0) return;

  if (auto c = first_collision(s.fx)) {
    auto [i, j] = *c;
    rep.fail({s.pts[i], s.pts[j], "f(x) = " + to_string(s.fx[i]), "f(y) = " + to_string(s.fx[j]), "injective"});
    return;
  }

  RVq d0 = rvq_exact(s.dfx[0], p, n);
  if (d0.zero) {
    rep.fail({s.pts[0], s.pts[0], "f'(x) = 0", "nonzero derivative", "c"});
    return;
  }
  for (Index i = 1; i < N; ++i) {
    RVq di = rvq_exact(s.dfx[i], p, n);
    bool same = n == 0 ? (!di.zero && di.v == d0.v) : di == d0;
    if (!same) {
      std::string name = n == 0 ? "ord f'" : "rv_" + std::to_string(n) + " f'";
      rep.fail({s.pts[0], s.pts[i], name + "(x) = " + rvq_string(d0, p, n), name + "(y) = " + rvq_string(di, p, n),
                "c"});
      return;
    }
  }

  ScaledResidues X(s.pts, p), F(s.fx, p);
  for (Index i = 0; i < N; ++i) {
    ++rep.checked_pairs;  // x = y: both sides zero
    RVq di = rvq_exact(s.dfx[i], p, n);
    for (Index j = i + 1; j < N; ++j) {
      ++rep.checked_pairs;
      RVq lhs = rvq_mul(di, X.diff(i, j, n), p, n);
      RVq rhs = F.diff(i, j, n);
      if (!(lhs == rhs)) {
        rep.fail({s.pts[i], s.pts[j], "f'(x)*(x-y) -> " + rvq_string(lhs, p, n),
                  "f(x)-f(y) -> " + rvq_string(rhs, p, n), "d"});
        return;
      }
    }
  }

  // (a): images stay in the predicted ball and fill its residue classes as
  // densely as the sample fills those of B.
  const std::int64_t R = d0.v + z;
  const Rational image_center = fa ? *fa : s.fx[0];
  for (Index i = 0; i < N; ++i) {
    Rational w = s.fx[i] - image_center;
    if (w != 0 && ord_p(w, p) < R) {
      rep.fail({s.pts[i], a, "ord(f(x) - f(a)) = " + ord_text(w, p), "image radius " + std::to_string(R), "a"});
      return;
    }
  }
  const Rational down = pow_p(p, -z), down_image = pow_p(p, -R);
  int D = 0;
  for (int trial = 1; trial <= 8; ++trial) {
    std::uint64_t classes = ipow(p, trial);
    if (classes > N) break;
    std::set<std::uint64_t> seen;
    for (const auto& x : s.pts) seen.insert(int_residue((x - a) * down, p, trial));
    if (seen.size() != classes) break;
    D = trial;
  }
  if (D > 0) {
    std::set<std::uint64_t> seen;
    for (const auto& y : s.fx) seen.insert(int_residue((y - image_center) * down_image, p, D));
    if (seen.size() != ipow(p, D)) {
      rep.fail({a, a, std::to_string(ipow(p, D)) + " residue classes at depth " + std::to_string(D),
                std::to_string(seen.size()) + " classes hit by the image", "a"});
    }
  }
}

std::optional<Rational> value_at(const PiecewiseFunction& f, const Rational& t, std::uint64_t p) {
  if (!f.piece_at(t, p)) return std::nullopt;
  return eval_exact(f, t, p);
}

bool is_pole(const PiecewiseFunction& f, const Rational& t, std::uint64_t p) {
  auto i = f.piece_at(t, p);
  if (!i) return false;
  for (const auto& q : inverted_subterms(f.pieces[*i].body))
    if (q.eval(t) == 0) return true;
  return false;
}

}  // namespace

bool sample_less(const Rational& a, const Rational& b, std::uint64_t p) {
  if (a == b) return false;
  if (a == 0) return false;
  if (b == 0) return true;
  std::int64_t oa = ord_p(a, p), ob = ord_p(b, p);
  if (oa != ob) return oa < ob;
  Rational aa = abs(a), ab = abs(b);
  if (aa != ab) return aa < ab;
  return a > 0;
}

std::vector<Rational> ball_sample(const Ball& B, const Window& W, std::uint64_t p) {
  std::set<Rational> seen;
  std::vector<Rational> out;
  for (const auto& x : window_points(W, p)) {
    if (!B.contains(x, p)) continue;
    for (const Rational& y : {x, Rational(2 * B.center - x)})
      if (seen.insert(y).second) out.push_back(y);
  }
  std::sort(out.begin(), out.end(), [p](const Rational& a, const Rational& b) { return sample_less(a, b, p); });
  return out;
}

PropertyReport check_jacobian(const PiecewiseFunction& f, const Ball& B, const Window& W, const FieldContext& ctx) {
  return check_n_jacobian(f, B, 0, W, ctx);
}

PropertyReport check_n_jacobian(const PiecewiseFunction& f, const Ball& B, int n, const Window& W,
                                const FieldContext& ctx) {
  if (n < 0) throw PreconditionError("level n must be nonnegative");
  PropertyReport rep;
  rep.property = n == 0 ? "jacobian" : "n-jacobian";
  rep.n = n;
  rep.window = W;
  auto pts = ball_sample(B, W, ctx.p);
  if (pts.empty()) throw PreconditionError("the ball contains no window points");
  SampleData s = evaluate(f, differentiate(f), std::move(pts), ctx.p);
  jacobian_on_sample(rep, s, B.center, B.radius, value_at(f, B.center, ctx.p), n, ctx.p);
  return rep;
}

Cell ImageCell::as_cell(std::uint64_t p) const {
  if (point) return Cell::point(center);
  Rational lambda = pow_p(p, valuations.front()) * Rational(static_cast<unsigned long>(residue));
  return Cell::annulus(center, lambda, depth, modulus, valuations.front(), valuations.back(), p);
}

bool operator==(const ImageCell& a, const ImageCell& b) {
  if (a.point != b.point || a.center != b.center) return false;
  if (a.point) return true;
  return a.depth == b.depth && a.residue == b.residue && a.modulus == b.modulus && a.valuations == b.valuations;
}

CompatibilityReport check_n_compatible(const PiecewiseFunction& f, const Cell& A, int n, const Window& W,
                                       const FieldContext& ctx, std::optional<Rational> image_center) {
  CompatibilityReport out =
      check_n_compatible_on(f, A, n, A.is_point() ? std::vector<Rational>{} : enumerate_points(A, W, ctx.p), ctx,
                            image_center);
  out.report.window = W;
  return out;
}

CompatibilityReport check_n_compatible_on(const PiecewiseFunction& f, const Cell& A, int n,
                                          const std::vector<Rational>& sample, const FieldContext& ctx,
                                          std::optional<Rational> image_center) {
  const std::uint64_t p = ctx.p;
  validate_cell(A, p);
  CompatibilityReport out;
  PropertyReport& rep = out.report;
  rep.property = "n-compatible";
  rep.n = n;

  if (A.is_point()) {
    Rational v = eval_exact(f, A.center, p);
    rep.checked_points = 1;
    out.image = ImageCell{true, v, 1, 0, 1, {}, 1};
    return out;
  }

  PiecewiseFunction df = differentiate(f);
  SampleData s = evaluate(f, df, sample, p);
  const Index N = s.pts.size();
  if (N == 0) return out;

  if (std::all_of(s.fx.begin(), s.fx.end(), [&](const Rational& v) { return v == s.fx[0]; })) {
    rep.checked_points = N;
    out.image = ImageCell{true, s.fx[0], 1, 0, 1, {}, N};
    return out;
  }

  if (auto c = first_collision(s.fx)) {
    auto [i, j] = *c;
    rep.checked_points = N;
    rep.fail({s.pts[i], s.pts[j], "f(x) = " + to_string(s.fx[i]), "f(y) = " + to_string(s.fx[j]), "injective"});
    return out;
  }

  // one ball of A per valuation of t - c
  std::map<std::int64_t, std::vector<Index>> balls;
  for (Index i = 0; i < N; ++i) balls[ord_p(s.pts[i] - A.center, p)].push_back(i);
  out.balls = balls.size();
  for (const auto& [o, members] : balls) {
    SampleData sub;
    for (Index i : members) {
      sub.pts.push_back(s.pts[i]);
      sub.fx.push_back(s.fx[i]);
      sub.dfx.push_back(s.dfx[i]);
    }
    jacobian_on_sample(rep, sub, sub.pts[0], o + A.m, sub.fx[0], n, p);
    if (!rep.pass) return out;
  }

  Rational d = 0;
  if (image_center) {
    d = *image_center;
  } else if (f.piece_at(A.center, p) && !is_pole(f, A.center, p)) {
    d = eval_exact(f, A.center, p);
  }
  ImageCell img;
  img.center = d;
  img.sampled_points = N;
  std::optional<std::int64_t> depth;
  std::optional<std::uint64_t> mu;
  std::set<std::int64_t> vals;
  std::map<std::int64_t, std::int64_t> image_ball_of;  // ord(f - d) -> ord(t - c)
  for (Index i = 0; i < N; ++i) {
    Rational zt = s.fx[i] - d;
    if (zt == 0) {
      rep.fail({s.pts[i], s.pts[i], "f(t) = " + to_string(s.fx[i]), "image center " + to_string(d), "image-cell"});
      return out;
    }
    std::int64_t oz = ord_p(zt, p);
    std::int64_t ot = ord_p(s.pts[i] - A.center, p);
    std::int64_t l = ord_p(s.dfx[i], p) + ot + A.m - oz;
    if (l < 1 || (depth && *depth != l)) {
      rep.fail({s.pts[0], s.pts[i], "image depth " + (depth ? std::to_string(*depth) : std::string("-")),
                "image depth " + std::to_string(l), "image-cell"});
      return out;
    }
    depth = l;
    std::uint64_t a = int_residue(zt * pow_p(p, -oz), p, static_cast<int>(l));
    if (mu && *mu != a) {
      rep.fail({s.pts[0], s.pts[i], "ac(f - d) = " + std::to_string(*mu), "ac(f - d) = " + std::to_string(a),
                "image-cell"});
      return out;
    }
    mu = a;
    vals.insert(oz);
    auto [it, fresh] = image_ball_of.emplace(oz, ot);
    if (!fresh && it->second != ot) {
      rep.fail({s.pts[i], s.pts[i], "image ball at ord " + std::to_string(oz),
                "meets domain balls " + std::to_string(it->second) + " and " + std::to_string(ot), "image-ball"});
      return out;
    }
  }
  img.depth = static_cast<int>(*depth);
  img.residue = *mu;
  img.valuations.assign(vals.begin(), vals.end());
  std::int64_t g = 0;
  for (auto v : img.valuations) g = std::gcd(g, v - img.valuations.front());
  img.modulus = g == 0 ? 1 : static_cast<int>(g);
  out.image = img;
  return out;
}

EquicompatibilityReport check_n_equicompatible(const PiecewiseFunction& f, const PiecewiseFunction& g, const Cell& A,
                                               int n, const Window& W, const FieldContext& ctx,
                                               std::optional<Rational> image_center) {
  EquicompatibilityReport out = check_n_equicompatible_on(
      f, g, A, n, A.is_point() ? std::vector<Rational>{} : enumerate_points(A, W, ctx.p), ctx, image_center);
  out.report.window = out.f.report.window = out.g.report.window = W;
  return out;
}

EquicompatibilityReport check_n_equicompatible_on(const PiecewiseFunction& f, const PiecewiseFunction& g,
                                                  const Cell& A, int n, const std::vector<Rational>& sample,
                                                  const FieldContext& ctx, std::optional<Rational> image_center) {
  return check_n_equicompatible_on(check_n_compatible_on(f, A, n, sample, ctx, image_center), f, g, A, n, sample, ctx,
                                   image_center);
}

EquicompatibilityReport check_n_equicompatible_on(const CompatibilityReport& fc, const PiecewiseFunction& f,
                                                  const PiecewiseFunction& g, const Cell& A, int n,
                                                  const std::vector<Rational>& sample, const FieldContext& ctx,
                                                  std::optional<Rational> image_center) {
  const std::uint64_t p = ctx.p;
  EquicompatibilityReport out;
  PropertyReport& rep = out.report;
  rep.property = "n-equicompatible";
  rep.n = n;
  out.f = fc;
  out.g = check_n_compatible_on(g, A, n, sample, ctx, image_center);
  rep.checked_pairs = out.f.report.checked_pairs + out.g.report.checked_pairs;
  rep.checked_points = out.f.report.checked_points;
  for (auto* side : {&out.f, &out.g}) {
    if (!side->report.pass) {
      Counterexample c = *side->report.counterexample;
      c.condition = (side == &out.f ? "f:" : "g:") + c.condition;
      rep.fail(c);
      return out;
    }
  }
  if (!out.f.image || !out.g.image) return out;
  const ImageCell& If = *out.f.image;
  const ImageCell& Ig = *out.g.image;
  auto describe = [&](const ImageCell& I) {
    if (I.point) return "point " + to_string(I.center);
    return "center " + to_string(I.center) + ", depth " + std::to_string(I.depth) + ", ac " +
           std::to_string(I.residue) + ", ord " + std::to_string(I.valuations.front()) + ".." +
           std::to_string(I.valuations.back()) + " step " + std::to_string(I.modulus);
  };
  std::vector<Rational> pts = A.is_point() ? std::vector<Rational>{A.center} : sample;
  if (If.point) {
    // constant images: the functions must agree pointwise
    for (const auto& t : pts) {
      Rational a = eval_exact(f, t, p), b = eval_exact(g, t, p);
      if (a != b) {
        rep.fail({t, t, "f(t) = " + to_string(a), "g(t) = " + to_string(b), "h=k"});
        return out;
      }
    }
    return out;
  }
  if (!If.point && !Ig.point) {
    PiecewiseFunction df = differentiate(f), dg = differentiate(g);
    for (const auto& t : pts) {
      RVq a = rvq_exact(eval_exact(df, t, p), p, n), b = rvq_exact(eval_exact(dg, t, p), p, n);
      if (!(a == b)) {
        rep.fail({t, t, "f'(t) -> " + rvq_string(a, p, n), "g'(t) -> " + rvq_string(b, p, n), "derivative"});
        return out;
      }
    }
  }
  if (If.point != Ig.point || (!If.point && !(If == Ig))) {
    rep.fail({A.center, A.center, "A_f: " + describe(If), "A_g: " + describe(Ig), "image-cell"});
    return out;
  }
  return out;
}

// ---------------------------------------------------------------- solvers

int default_target(const Window& W, int n) { return W.unit_level + n; }

std::optional<Rational> rational_reconstruction(const Rational& x, std::uint64_t p, int M) {
  if (x == 0) return Rational(0);
  std::int64_t v = ord_p(x, p);
  std::int64_t shift = v < 0 ? -v : 0;
  Rational y = x * pow_p(p, shift);
  Integer m;
  mpz_ui_pow_ui(m.get_mpz_t(), p, static_cast<unsigned long>(M));
  Integer a = y.get_num() % m;
  Integer den = y.get_den() % m;
  Integer inv;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0) return std::nullopt;
  a = (a * inv) % m;
  if (a < 0) a += m;
  Integer bound;
  mpz_sqrt(bound.get_mpz_t(), Integer(m / 2).get_mpz_t());
  Integer r0 = m, r1 = a, s0 = 0, s1 = 1;
  while (r1 > bound) {
    Integer q = r0 / r1;
    Integer r2 = r0 - q * r1, s2 = s0 - q * s1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
  }
  if (s1 == 0 || abs(s1) > bound) return std::nullopt;
  Rational out(r1, s1);
  out.canonicalize();
  if (out.get_den() % p == 0) return std::nullopt;
  return out * pow_p(p, -shift);
}

namespace {

// Representative of x in B(a, z) with t digits below the radius kept.
Rational truncate_in_ball(const Rational& x, const Rational& a, std::int64_t z, int t, std::uint64_t p) {
  Rational y = (x - a) * pow_p(p, -z);
  Integer m;
  mpz_ui_pow_ui(m.get_mpz_t(), p, static_cast<unsigned long>(std::max(t, 1)));
  Integer num = y.get_num() % m, inv;
  Integer den = y.get_den() % m;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0)
    throw Error("iterate left the ball");
  Integer u = (num * inv) % m;
  if (u < 0) u += m;
  return a + pow_p(p, z) * Rational(u);
}

std::optional<std::int64_t> ord_or_inf(const Rational& x, std::uint64_t p) {
  if (x == 0) return std::nullopt;
  return ord_p(x, p);
}

bool reached(const std::optional<std::int64_t>& o, std::int64_t target) { return !o || *o >= target; }

SolverResult failed(std::string name, std::optional<Counterexample> witness, std::int64_t target) {
  SolverResult r;
  r.ok = false;
  r.failure = std::move(name);
  r.witness = std::move(witness);
  r.target = target;
  return r;
}

std::vector<Rational> window_in_ball(const Ball& B, const Window& W, std::uint64_t p) {
  std::vector<Rational> out;
  for (const auto& x : window_points(W, p))
    if (B.contains(x, p)) out.push_back(x);
  if (B.contains(0, p) && std::find(out.begin(), out.end(), Rational(0)) == out.end()) out.push_back(0);
  return out;
}

// Solves f(x) = y on B digit by digit, given that f has the Jacobian property
// on B with ord f' = o and y lies in the image ball.
Rational invert_on_ball(const PiecewiseFunction& f, const Rational& y, const Ball& B, std::int64_t o, int digits,
                        std::uint64_t p) {
  Rational x = B.center;
  for (int j = 0; j < digits; ++j) {
    Rational step = pow_p(p, B.radius + j);
    bool found = false;
    for (std::uint64_t d = 0; d < p && !found; ++d) {
      Rational cand = x + step * Rational(static_cast<unsigned long>(d));
      if (reached(ord_or_inf(eval_exact(f, cand, p) - y, p), o + B.radius + j + 1)) {
        x = cand;
        found = true;
      }
    }
    if (!found) throw Error("inversion failed: the map is not a bijection of residue classes on the ball");
  }
  return x;
}

}  // namespace

SolverResult banach_fixed_point(const PiecewiseFunction& f, const Ball& B, std::int64_t target, const Window& W,
                                const FieldContext& ctx) {
  const std::uint64_t p = ctx.p;
  std::vector<Rational> pts = window_in_ball(B, W, p);
  std::sort(pts.begin(), pts.end(), [p](const Rational& a, const Rational& b) { return sample_less(a, b, p); });
  std::vector<Rational> fx;
  for (const auto& x : pts) fx.push_back(eval_exact(f, x, p));
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!B.contains(fx[i], p))
      return failed("maps-into-ball", Counterexample{pts[i], pts[i], "f(x) = " + to_string(fx[i]),
                                                     "ball radius " + std::to_string(B.radius), "maps-into-ball"},
                    target);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      auto lhs = ord_or_inf(fx[i] - fx[j], p);
      std::int64_t rhs = ord_p(pts[i] - pts[j], p);
      if (lhs && *lhs <= rhs)
        return failed("contraction",
                      Counterexample{pts[i], pts[j], "ord(f(x)-f(y)) = " + std::to_string(*lhs),
                                     "ord(x-y) = " + std::to_string(rhs), "contraction"},
                      target);
    }

  SolverResult r;
  r.target = target;
  const int digits = static_cast<int>(std::max<std::int64_t>(1, target - B.radius + 2));
  Rational x = B.center;
  auto gap = ord_or_inf(eval_exact(f, x, p) - x, p);
  const std::int64_t budget = std::max<std::int64_t>(target + 4, target - (gap ? *gap : target) + 4);
  while (!reached(gap, target)) {
    if (r.iterations >= budget) throw Error("internal: fixed-point iteration exceeded its budget");
    x = truncate_in_ball(eval_exact(f, x, p), B.center, B.radius, digits, p);
    ++r.iterations;
    gap = ord_or_inf(eval_exact(f, x, p) - x, p);
  }
  r.ok = true;
  r.value = x;
  r.achieved = gap;
  if (auto q = rational_reconstruction(x, p, static_cast<int>(std::max<std::int64_t>(1, target))))
    if (B.contains(*q, p) && f.piece_at(*q, p) && eval_exact(f, *q, p) == *q) r.exact = q;
  return r;
}

SolverResult solve_equal_point(const PiecewiseFunction& f1_in, const PiecewiseFunction& f2_in, const Ball& B,
                               std::int64_t target, const Window& W, const FieldContext& ctx) {
  const std::uint64_t p = ctx.p;
  for (const auto* f : {&f1_in, &f2_in}) {
    PropertyReport j = check_jacobian(*f, B, W, ctx);
    if (!j.pass) return failed(f == &f1_in ? "jacobian-f1" : "jacobian-f2", j.counterexample, target);
  }
  const PiecewiseFunction* f1 = &f1_in;
  const PiecewiseFunction* f2 = &f2_in;
  PiecewiseFunction d1 = differentiate(*f1), d2 = differentiate(*f2);
  Rational a = B.center;
  std::int64_t o1 = ord_p(eval_exact(d1, a, p), p), o2 = ord_p(eval_exact(d2, a, p), p);
  if (o1 == o2)
    return failed("distinct-derivative-orders",
                  Counterexample{a, a, "ord f1' = " + std::to_string(o1), "ord f2' = " + std::to_string(o2),
                                 "distinct-derivative-orders"},
                  target);
  // iterate x <- f1^{-1}(f2(x)) with f1 the steeper map, so that the composite contracts
  if (o1 > o2) {
    std::swap(f1, f2);
    std::swap(o1, o2);
  }
  Rational y1 = eval_exact(*f1, a, p), y2 = eval_exact(*f2, a, p);
  if (!reached(ord_or_inf(y2 - y1, p), o1 + B.radius))
    return failed("images-intersect",
                  Counterexample{a, a, "f1(a) = " + to_string(y1), "f2(a) = " + to_string(y2), "images-intersect"},
                  target);

  SolverResult r;
  r.target = target;
  const int digits = static_cast<int>(std::max<std::int64_t>(1, target - o1 - B.radius + 2));
  Rational x = a;
  auto defect = ord_or_inf(eval_exact(*f1, x, p) - eval_exact(*f2, x, p), p);
  const std::int64_t budget = std::max<std::int64_t>(target + 4, target - (defect ? *defect : target) + 4);
  while (!reached(defect, target)) {
    if (r.iterations >= budget) throw Error("internal: equal-point iteration exceeded its budget");
    x = invert_on_ball(*f1, eval_exact(*f2, x, p), B, o1, digits, p);
    ++r.iterations;
    defect = ord_or_inf(eval_exact(*f1, x, p) - eval_exact(*f2, x, p), p);
  }
  r.ok = true;
  r.value = x;
  r.achieved = defect;

  const std::int64_t K = B.radius + digits;
  for (const auto& w : window_in_ball(B, W, p)) {
    if (reached(ord_or_inf(w - x, p), K)) continue;
    if (reached(ord_or_inf(eval_exact(*f1, w, p) - eval_exact(*f2, w, p), p), o1 + K))
      throw Error("uniqueness violated: second solution near " + to_string(w));
  }
  if (auto q = rational_reconstruction(x, p, static_cast<int>(std::max<std::int64_t>(1, K))))
    if (B.contains(*q, p) && eval_exact(*f1, *q, p) == eval_exact(*f2, *q, p)) r.exact = q;
  return r;
}

SolverResult solve_equal_rv_point(const PiecewiseFunction& f1, const PiecewiseFunction& f2, const Ball& B, int n,
                                  std::int64_t target, const Window& W, const FieldContext& ctx) {
  const std::uint64_t p = ctx.p;
  if (n < 1) throw PreconditionError("level n must be at least 1");
  if (!B.contains(0, p)) throw PreconditionError("the ball must contain 0");
  for (const auto* f : {&f1, &f2}) {
    PropertyReport j = check_n_jacobian(*f, B, n, W, ctx);
    if (!j.pass) return failed(f == &f1 ? "n-jacobian-f1" : "n-jacobian-f2", j.counterexample, target);
  }
  PiecewiseFunction d1 = differentiate(f1), d2 = differentiate(f2);
  std::vector<Rational> pts = window_in_ball(B, W, p);
  std::sort(pts.begin(), pts.end(), [p](const Rational& a, const Rational& b) { return sample_less(a, b, p); });
  for (const auto* f : {&f1, &f2}) {
    const PiecewiseFunction& df = f == &f1 ? d1 : d2;
    for (const auto& x : pts) {
      Rational v = eval_exact(*f, x, p);
      Rational dv = eval_exact(df, x, p);
      if (!B.contains(v, p) || dv == 0 || ord_p(dv, p) != 0)
        return failed(f == &f1 ? "self-bijection-f1" : "self-bijection-f2",
                      Counterexample{x, x, "f(x) = " + to_string(v), "f'(x) = " + to_string(dv), "self-bijection"},
                      target);
    }
  }
  Rational a0 = pts.front();
  Rational g1 = eval_exact(d1, a0, p), g2 = eval_exact(d2, a0, p);
  if (rvq_exact(g1, p, n) == rvq_exact(g2, p, n))
    return failed("distinct-derivative-rv",
                  Counterexample{a0, a0, "rv f1' = " + rv_text(g1, p, n), "rv f2' = " + rv_text(g2, p, n),
                                 "distinct-derivative-rv"},
                  target);
  const std::int64_t close = B.radius + n - 1;
  std::optional<Rational> start;
  for (const auto& x : pts)
    if (reached(ord_or_inf(eval_exact(f1, x, p) - eval_exact(f2, x, p), p), close)) {
      start = x;
      break;
    }
  if (!start)
    return failed("closeness", Counterexample{a0, a0, "ord(f1(a)-f2(a)) < " + std::to_string(close),
                                              "for every sampled a", "closeness"},
                  target);

  SolverResult r;
  r.target = target;
  const std::int64_t delta = ord_p(g1 - g2, p);
  const int digits = static_cast<int>(std::max<std::int64_t>(1, target - delta - B.radius + 2));
  Rational x = *start;
  Rational c = eval_exact(f1, x, p) - eval_exact(f2, x, p);
  auto defect = ord_or_inf(c, p);
  const std::int64_t budget = std::max<std::int64_t>(target + 4, target - (defect ? *defect : target) + 4);
  while (!reached(defect, target)) {
    if (r.iterations >= budget) throw Error("internal: linearized iteration exceeded its budget");
    Rational d = eval_exact(d1, x, p) - eval_exact(d2, x, p);
    if (d == 0) throw Error("internal: derivative difference vanished");
    x = truncate_in_ball(x - c / d, B.center, B.radius, digits, p);
    ++r.iterations;
    c = eval_exact(f1, x, p) - eval_exact(f2, x, p);
    defect = ord_or_inf(c, p);
  }
  r.ok = true;
  r.value = x;
  r.achieved = defect;

  const std::int64_t K = B.radius + digits;
  for (const auto& w : pts) {
    if (reached(ord_or_inf(w - x, p), K)) continue;
    if (reached(ord_or_inf(eval_exact(f1, w, p) - eval_exact(f2, w, p), p), delta + K))
      throw Error("uniqueness violated: second solution near " + to_string(w));
  }
  if (auto q = rational_reconstruction(x, p, static_cast<int>(std::max<std::int64_t>(1, K))))
    if (B.contains(*q, p) && eval_exact(f1, *q, p) == eval_exact(f2, *q, p)) r.exact = q;
  return r;
}

}  // namespace padicprep
