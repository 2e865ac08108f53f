#include "padicprep/lipschitz.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>

#include "padicprep/prepare.hpp"
#include "residues.hpp"

namespace padicprep {

namespace {

using detail::RVq;
using detail::ScaledResidues;

std::string norm_text(std::int64_t minus_ord) { return "q^" + std::to_string(minus_ord); }

struct PairFailure {
  std::size_t i, j;
};

// Least (i, j), i < j, with ord(f_i - f_j) < ord(x_i - x_j) - e.
std::optional<PairFailure> scan_pairs(const std::vector<Rational>& xs, const std::vector<Rational>& fx,
                                      std::int64_t e, std::uint64_t p, int jobs,
                                      const std::vector<std::size_t>* group = nullptr) {
  const std::size_t N = xs.size();
  if (N < 2) return std::nullopt;
  ScaledResidues X(xs, p), F(fx, p);
  auto violates = [&](std::size_t i, std::size_t j) {
    if (group && (*group)[i] != (*group)[j]) return false;
    RVq df = F.diff(i, j, 0);
    if (df.zero) return false;
    RVq dx = X.diff(i, j, 0);
    return df.v < dx.v - e;
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(N)));
  std::vector<std::optional<PairFailure>> found(jobs);
  auto worker = [&](int tid) {
    for (std::size_t i = tid; i + 1 < N; i += jobs)
      for (std::size_t j = i + 1; j < N; ++j)
        if (violates(i, j)) {
          found[tid] = PairFailure{i, j};
          return;
        }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  std::optional<PairFailure> best;
  for (const auto& f : found)
    if (f && (!best || f->i < best->i)) best = f;
  return best;
}

std::uint64_t pairs_through(std::size_t N, const std::optional<PairFailure>& f) {
  if (!f) return N < 2 ? 0 : static_cast<std::uint64_t>(N) * (N - 1) / 2;
  std::uint64_t before = 0;
  for (std::size_t i = 0; i < f->i; ++i) before += N - 1 - i;
  return before + (f->j - f->i);
}

std::vector<Rational> points_of(const std::vector<Cell>& cells, const WindowIndex& idx, std::uint64_t p) {
  std::vector<Rational> pts;
  for (const auto& A : cells)
    for (auto& t : idx.in_cell(A)) pts.push_back(std::move(t));
  std::sort(pts.begin(), pts.end(), [p](const Rational& a, const Rational& b) { return sample_less(a, b, p); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

PropertyReport global_on(const PiecewiseFunction& f, const std::vector<Cell>& cells, LipschitzBudget budget,
                         const WindowIndex& idx, const FieldContext& ctx, int jobs) {
  const std::uint64_t p = ctx.p;
  PropertyReport rep;
  rep.property = "global-lipschitz";
  rep.window = idx.window();
  std::vector<Rational> pts = points_of(cells, idx, p);
  std::vector<Rational> fx;
  fx.reserve(pts.size());
  for (const auto& t : pts) fx.push_back(eval_exact(f, t, p));
  rep.checked_points = pts.size();
  auto fail = scan_pairs(pts, fx, budget.exponent, p, jobs);
  rep.checked_pairs = pairs_through(pts.size(), fail);
  if (fail) {
    const Rational& x = pts[fail->i];
    const Rational& y = pts[fail->j];
    rep.fail({x, y, "|f(x) - f(y)| = " + norm_text(-ord_p(fx[fail->i] - fx[fail->j], p)),
              "q^e |x - y| = " + norm_text(budget.exponent - ord_p(x - y, p)), "global"});
  }
  return rep;
}

Cell with_radii(const Cell& A, std::optional<std::int64_t> lo, std::optional<std::int64_t> hi, std::uint64_t p) {
  return Cell::annulus(A.center, A.lambda, A.m, A.n, lo, hi, p);
}

}  // namespace

LipschitzBudget LipschitzBudget::floor_of(const Rational& eps, std::uint64_t p) {
  if (eps <= 0) throw PreconditionError("Lipschitz constant must be positive");
  std::int64_t e = 0;
  Rational q(static_cast<unsigned long>(p));
  Rational pe = 1;
  while (pe > eps) {
    pe /= q;
    --e;
  }
  while (pe * q <= eps) {
    pe *= q;
    ++e;
  }
  return {e};
}

Rational LipschitzBudget::epsilon(std::uint64_t p) const { return pow_p(p, exponent); }

PropertyReport verify_local_lipschitz(const PiecewiseFunction& f, const std::vector<Cell>& domain,
                                      LipschitzBudget budget, const Window& W, const FieldContext& ctx) {
  const std::uint64_t p = ctx.p;
  PropertyReport rep;
  rep.property = "local-lipschitz";
  rep.window = W;
  const WindowIndex idx(W, p);
  const PiecewiseFunction df = differentiate(f);
  std::vector<std::vector<Rational>> per_cell;
  for (const auto& A : domain) per_cell.push_back(idx.in_cell(A));
  for (const auto& pts : per_cell)
    for (const auto& t : pts) {
      ++rep.checked_points;
      Rational d = eval_exact(df, t, p);
      if (d != 0 && -ord_p(d, p) > budget.exponent) {
        rep.fail({t, t, "|f'(t)| = " + norm_text(-ord_p(d, p)), "q^e = " + norm_text(budget.exponent), "derivative"});
        return rep;
      }
    }
  // pairs inside one ball of a cell: one ball per valuation of t - c
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const Cell& A = domain[k];
    const auto& pts = per_cell[k];
    if (A.is_point() || pts.size() < 2) continue;
    std::map<std::int64_t, std::size_t> ball_id;
    std::vector<std::size_t> group;
    for (const auto& t : pts) group.push_back(ball_id.emplace(ord_p(t - A.center, p), ball_id.size()).first->second);
    std::vector<Rational> fx;
    for (const auto& t : pts) fx.push_back(eval_exact(f, t, p));
    auto fail = scan_pairs(pts, fx, budget.exponent, p, 1, &group);
    std::map<std::size_t, std::uint64_t> sizes;
    for (auto g : group) ++sizes[g];
    for (const auto& [g, s] : sizes) rep.checked_pairs += s * (s - 1) / 2;
    if (fail) {
      const Rational& x = pts[fail->i];
      const Rational& y = pts[fail->j];
      rep.fail({x, y, "|f(x) - f(y)| = " + norm_text(-ord_p(fx[fail->i] - fx[fail->j], p)),
                "q^e |x - y| = " + norm_text(budget.exponent - ord_p(x - y, p)), "ball-pair"});
      return rep;
    }
  }
  return rep;
}

PropertyReport verify_local_lipschitz(const PiecewiseFunction& f, const Cell& domain, LipschitzBudget budget,
                                      const Window& W, const FieldContext& ctx) {
  return verify_local_lipschitz(f, std::vector<Cell>{domain}, budget, W, ctx);
}

PropertyReport verify_global_lipschitz(const PiecewiseFunction& f, const std::vector<Cell>& part,
                                       LipschitzBudget budget, const Window& W, const FieldContext& ctx, int jobs) {
  return global_on(f, part, budget, WindowIndex(W, ctx.p), ctx, jobs);
}

PropertyReport verify_global_lipschitz(const PiecewiseFunction& f, const Cell& part, LipschitzBudget budget,
                                       const Window& W, const FieldContext& ctx, int jobs) {
  return verify_global_lipschitz(f, std::vector<Cell>{part}, budget, W, ctx, jobs);
}

std::optional<std::int64_t> measured_exponent(const PiecewiseFunction& f, const std::vector<Cell>& domain,
                                              const Window& W, const FieldContext& ctx) {
  const std::uint64_t p = ctx.p;
  const WindowIndex idx(W, p);
  const PiecewiseFunction df = differentiate(f);
  std::optional<std::int64_t> e;
  for (const auto& A : domain)
    for (const auto& t : idx.in_cell(A)) {
      Rational d = eval_exact(df, t, p);
      if (d == 0) continue;
      std::int64_t k = -ord_p(d, p);
      if (!e || k > *e) e = k;
    }
  return e;
}

std::vector<Cell> lipschitz_domain(const PiecewiseFunction& f, const Guard& domain, std::uint64_t p) {
  if (!domain.all) return guard_cells(domain, p);
  std::vector<Cell> out;
  for (const auto& piece : f.pieces)
    for (const auto& A : guard_cells(piece.guard, p)) out.push_back(A);
  return out;
}

LipschitzDecomposition decompose_lipschitz(const PiecewiseFunction& f, const Guard& domain, LipschitzBudget budget,
                                           int n, const Window& W, const FieldContext& ctx, int jobs) {
  const std::uint64_t p = ctx.p;
  LipschitzDecomposition out;
  out.budget = budget;
  out.n = n;
  out.local = verify_local_lipschitz(f, lipschitz_domain(f, domain, p), budget, W, ctx);
  if (!out.local.pass) {
    const Counterexample& c = *out.local.counterexample;
    throw PreconditionError("local Lipschitz check fails at (" + to_string(c.x) + ", " + to_string(c.y) +
                            "): " + c.lhs + " > " + c.rhs);
  }
  const WindowIndex idx(W, p);
  Partition P = prepare({f}, n, domain, W, ctx);
  out.prepared_cells = P.cells.size();
  const PiecewiseFunction df = differentiate(f);

  std::map<std::size_t, std::vector<Cell>> regions;
  std::map<std::size_t, bool> region_beyond;
  std::vector<LipschitzPart> excised;
  for (const auto& pc : P.cells) {
    const Cell& A = pc.cell;
    std::vector<Rational> pts = certification_sample(A, idx);
    std::size_t piece = 0;
    if (f.pieces.size() > 1) {
      auto at = f.piece_at(pts.front(), p);
      if (!at) throw Error("prepared cell at " + to_string(A.center) + " lies outside every guard");
      piece = *at;
    }
    const CellApproximation& ap = pc.fns.front();
    const int delta = ap.ell_prime - pc.ell;
    const bool beyond = A.unbounded();
    if (A.is_point() || delta <= 0) {
      regions[piece].push_back(A);
      region_beyond[piece] = region_beyond[piece] || beyond;
      continue;
    }
    if (ap.m.a == 1) {
      out.log.push_back("cell at " + to_string(A.center) + ": exponent 1 with l' - l = " + std::to_string(delta) +
                        ", accepted by the exponent rule");
      regions[piece].push_back(A);
      region_beyond[piece] = region_beyond[piece] || beyond;
      continue;
    }
    // excise the radii where |f'| exceeds q^(e - (l' - l))
    std::set<std::int64_t> bad;
    for (const auto& t : idx.in_cell(A)) {
      std::int64_t r = ord_p(t - A.center, p);
      Rational d = eval_exact(df, t, p);
      if (d != 0 && -ord_p(d, p) > budget.exponent - delta) bad.insert(r);
    }
    if (bad.empty()) {
      regions[piece].push_back(A);
      region_beyond[piece] = region_beyond[piece] || beyond;
      continue;
    }
    const std::uint64_t unit = ac_exact(A.lambda, p, A.m);
    std::optional<std::int64_t> from = A.ord_min(p);
    for (std::int64_t r : bad) {
      if (!from || *from <= r - A.n) regions[piece].push_back(with_radii(A, from, r - A.n, p));
      Cell thin = Cell::annulus(A.center, pow_p(p, r) * Rational(static_cast<unsigned long>(unit)), A.m, 1, r, r, p);
      LipschitzPart part;
      part.cells = {thin};
      part.origin = "excised";
      part.piece = piece;
      excised.push_back(part);
      ++out.excised;
      from = r + A.n;
    }
    auto hi = A.ord_max(p);
    if (!hi || *from <= *hi) {
      regions[piece].push_back(with_radii(A, from, hi, p));
      region_beyond[piece] = region_beyond[piece] || !hi;
    }
  }

  for (auto& [piece, cells] : regions) {
    LipschitzPart part;
    part.cells = cells;
    part.origin = "region";
    if (f.pieces.size() > 1) part.piece = piece;
    part.beyond_window = region_beyond[piece];
    part.report = global_on(f, cells, budget, idx, ctx, jobs);
    if (part.report.pass) {
      out.parts.push_back(std::move(part));
      continue;
    }
    out.log.push_back("region " + std::to_string(piece) + " fails as one part; emitting its cells separately");
    for (const auto& A : cells) {
      LipschitzPart single;
      single.cells = {A};
      single.origin = "cell";
      single.piece = part.piece;
      single.beyond_window = A.unbounded();
      single.report = global_on(f, single.cells, budget, idx, ctx, jobs);
      if (!single.report.pass) {
        const Counterexample& c = *single.report.counterexample;
        throw Error("part around " + to_string(A.center) + " fails global verification at (" + to_string(c.x) +
                    ", " + to_string(c.y) + ")");
      }
      out.parts.push_back(std::move(single));
    }
  }
  for (auto& part : excised) {
    part.report = global_on(f, part.cells, budget, idx, ctx, jobs);
    if (!part.report.pass) throw Error("excised cell at " + to_string(part.cells.front().center) + " fails");
    out.parts.push_back(std::move(part));
  }
  return out;
}

}  // namespace padicprep
