#include "padicprep/prepare.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace padicprep {

namespace {

std::int64_t vp(std::int64_t a, std::uint64_t p) {
  if (a == 0) return 0;
  return ord_p(Integer(static_cast<long>(a)), p);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

struct Sig {
  bool good = false;
  Rational d;
  Rational e;
  std::int64_t a = 0;
  friend bool operator==(const Sig& x, const Sig& y) {
    return x.good == y.good && x.d == y.d && x.e == y.e && x.a == y.a;
  }
};

// Dominant Taylor index at radius r: unique minimum of ord(T_i) + i r with
// every other term at least `margin` larger.
std::optional<int> dominant(const Poly& T, std::int64_t r, std::int64_t margin, std::uint64_t p) {
  std::optional<int> best;
  std::int64_t best_o = 0, second = std::numeric_limits<std::int64_t>::max();
  for (int i = 0; i <= T.degree(); ++i) {
    if (T.coeff(i) == 0) continue;
    std::int64_t o = ord_p(T.coeff(i), p) + i * r;
    if (!best || o < best_o) {
      if (best) second = std::min(second, best_o);
      best = i;
      best_o = o;
    } else {
      second = std::min(second, o);
    }
  }
  if (!best) return std::nullopt;
  if (second != std::numeric_limits<std::int64_t>::max() && second - best_o < margin) return std::nullopt;
  return best;
}

void crossovers(const Poly& T, std::uint64_t p, std::vector<std::int64_t>& out) {
  for (int i = 0; i <= T.degree(); ++i) {
    if (T.coeff(i) == 0) continue;
    for (int j = i + 1; j <= T.degree(); ++j) {
      if (T.coeff(j) == 0) continue;
      std::int64_t num = ord_p(T.coeff(i), p) - ord_p(T.coeff(j), p);
      out.push_back(floor_div(num, j - i));
      out.push_back(floor_div(num, j - i) + 1);
    }
  }
}

// One function's body on a region, expanded around an owner.
struct Expansion {
  Poly P, Q;
  Rational d0;
  bool constant = false;
  Poly Pt, Qt, Rt;
  std::vector<std::pair<Rational, Poly>> shifted;  // (e, Taylor of P~ - eQ)

  Expansion(const RationalFunction& rf, const Rational& c, std::uint64_t p) : P(rf.num), Q(rf.den) {
    Rational qc = Q.eval(c);
    d0 = qc == 0 ? Rational(0) : Rational(P.eval(c) / qc);
    Poly Pd = P - d0 * Q;
    constant = Pd.is_zero();
    Pt = Pd.taylor_at(c);
    Qt = Q.taylor_at(c);
    Rt = (Pd.derivative() * Q - Pd * Q.derivative()).taylor_at(c);
    for (int i = 0; i <= std::min(Pt.degree(), Qt.degree()); ++i) {
      if (Pt.coeff(i) == 0 || Qt.coeff(i) == 0) continue;
      Rational e = Pt.coeff(i) / Qt.coeff(i);
      shifted.emplace_back(e, Pt - e * Qt);
    }
    (void)p;
  }

  void collect_crossovers(std::uint64_t p, std::vector<std::int64_t>& out) const {
    crossovers(Pt, p, out);
    crossovers(Qt, p, out);
    crossovers(Rt, p, out);
    for (const auto& s : shifted) crossovers(s.second, p, out);
  }
};

class Engine {
 public:
  Engine(const std::vector<PiecewiseFunction>& fs, int n, const WindowIndex& widx, const FieldContext& ctx,
         Partition& out)
      : fs_(fs), n_(n), widx_(widx), ctx_(ctx), p_(ctx.p), out_(out) {
    L_ = n + (p_ == 2 ? 1 : 0);
  }

  void run_region_line(const std::vector<RationalFunction>& bodies, const std::vector<Rational>& centers) {
    bodies_ = bodies;
    centers_ = centers;
    Rational owner = centers_.empty() ? Rational(0) : centers_.front();
    Owner o = make_owner(owner);
    emit_point(owner, "center");
    o.classes = all_units(1);
    o.S = 1;
    o.step = 1;
    o.phase = 0;
    process_owner(o, std::nullopt, std::nullopt, [](const Rational&) { return true; });
  }

  void run_region_cell(const std::vector<RationalFunction>& bodies, const std::vector<Rational>& centers,
                       const Cell& A) {
    bodies_ = bodies;
    centers_ = centers;
    if (A.is_point()) {
      emit_point(A.center, "domain point");
      return;
    }
    Owner o = make_owner(A.center);
    o.S = A.m;
    o.classes = {ac_exact(A.lambda, p_, A.m)};
    o.step = A.n;
    o.phase = floor_mod(ord_p(A.lambda, p_), A.n);
    process_owner(o, A.ord_min(p_), A.ord_max(p_), [&](const Rational& c) { return cell_contains(A, c, p_); });
  }

 private:
  struct Owner {
    Rational c;
    std::vector<Expansion> ex;
    std::vector<std::uint64_t> classes;  // allowed classes mod p^S
    int S = 1;
    std::int64_t step = 1;
    std::int64_t phase = 0;
  };

  const std::vector<PiecewiseFunction>& fs_;
  int n_;
  const WindowIndex& widx_;
  FieldContext ctx_;
  std::uint64_t p_;
  Partition& out_;
  int L_ = 1;
  std::vector<RationalFunction> bodies_;
  std::vector<Rational> centers_;

  std::vector<std::uint64_t> all_units(int level) const {
    std::vector<std::uint64_t> u;
    std::uint64_t top = ipow(p_, level);
    for (std::uint64_t a = 1; a < top; ++a)
      if (a % p_ != 0) u.push_back(a);
    return u;
  }

  Owner make_owner(const Rational& c) {
    Owner o;
    o.c = c;
    for (const auto& b : bodies_) o.ex.emplace_back(b, c, p_);
    return o;
  }

  std::int64_t margin(std::int64_t a) const { return n_ + 2 * vp(a, p_) + 1 + (p_ == 2 ? 2 : 0); }

  Sig signature(const Expansion& x, std::int64_t r) const {
    Sig s;
    if (x.constant) {
      s.good = true;
      s.d = x.d0;
      return s;
    }
    auto k = dominant(x.Qt, r, 0, p_);
    auto i = dominant(x.Pt, r, 0, p_);
    if (!i || !k) return s;
    Rational d = x.d0;
    const Poly* num = &x.Pt;
    if (*i == *k) {
      Rational e = x.Pt.coeff(*i) / x.Qt.coeff(*k);
      num = nullptr;
      for (const auto& sh : x.shifted)
        if (sh.first == e) num = &sh.second;
      if (!num || num->is_zero()) return s;
      d += e;
      i = dominant(*num, r, 0, p_);
      if (!i || *i == *k) return s;
    }
    std::int64_t a = *i - *k;
    std::int64_t M = margin(a);
    if (!dominant(*num, r, M, p_) || !dominant(x.Qt, r, M, p_)) return s;
    auto j = dominant(x.Rt, r, n_ + 1 + (p_ == 2 ? 1 : 0), p_);
    if (!j || *j != *i + *k - 1) return s;
    s.good = true;
    s.d = d;
    s.e = num->coeff(*i) / x.Qt.coeff(*k);
    s.a = a;
    return s;
  }

  // ---- emission

  void emit_point(const Rational& c, const std::string& why) {
    PreparedCell pc;
    pc.cell = Cell::point(c);
    pc.ell = 1;
    pc.thin = true;
    pc.provenance = why;
    for (std::size_t j = 0; j < fs_.size(); ++j) {
      CellApproximation ap;
      ap.d = eval_exact(fs_[j], c, p_);
      ap.m = FractionalMonomial::integral(c, 0, 0);
      ap.sample = "point";
      pc.fns.push_back(ap);
    }
    if (!certify(pc)) throw Error("0-cell at " + to_string(c) + " failed certification");
    out_.cells.push_back(pc);
  }

  bool certify(PreparedCell& pc, bool window_only = false) {
    std::string kind;
    std::vector<Rational> sample = certification_sample(pc.cell, widx_, &kind);
    if (pc.cell.is_point()) sample.clear();
    if (window_only && kind == "synthetic") {
      sample.clear();
      kind = "none";
    }
    for (std::size_t j = 0; j < fs_.size(); ++j) {
      CellApproximation& ap = pc.fns[j];
      auto rep = check_n_equicompatible_on(fs_[j], monomial_function(ap.d, ap.m), pc.cell, n_, sample, ctx_, ap.d);
      ap.verified = rep.report.pass;
      ap.checked_points = rep.report.checked_points;
      ap.checked_pairs = rep.report.checked_pairs;
      ap.sample = kind;
      if (rep.f.image && !rep.f.image->point)
        ap.ell_prime = rep.f.image->depth;
      else
        ap.ell_prime = pc.ell + static_cast<int>(vp(ap.m.a, p_));
      if (!rep.report.pass) return false;
    }
    return true;
  }

  // Items of the radius walk: a single radius, or an unbounded tail.
  struct Item {
    std::int64_t r;
    bool tail_low = false;
    bool tail_high = false;
  };

  template <class Inside>
  void process_owner(Owner& o, std::optional<std::int64_t> lo, std::optional<std::int64_t> hi, Inside inside) {
    const Rational& c = o.c;
    // other centers that fall into this region: (radius, class mod p^S) -> sub-ball
    std::map<std::pair<std::int64_t, std::uint64_t>, Rational> special;
    for (const auto& cc : centers_) {
      if (cc == c || !inside(cc)) continue;
      Rational s = cc - c;
      std::int64_t r = ord_p(s, p_);
      if ((lo && r < *lo) || (hi && r > *hi)) continue;
      std::uint64_t cls = ac_exact(s, p_, o.S);
      if (std::find(o.classes.begin(), o.classes.end(), cls) == o.classes.end()) continue;
      special.emplace(std::make_pair(r, cls), cc);
    }

    std::vector<std::int64_t> marks;
    for (const auto& x : o.ex) x.collect_crossovers(p_, marks);
    std::int64_t spread = 0;
    for (const auto& x : o.ex) spread = std::max<std::int64_t>(spread, x.Pt.degree() + x.Qt.degree());
    std::int64_t M = n_ + 2 * 4 + 4 + spread;
    std::vector<std::int64_t> anchors;
    for (auto m : marks) {
      anchors.push_back(m - M);
      anchors.push_back(m + M);
    }
    for (const auto& [key, cc] : special) anchors.push_back(key.first);
    if (auto h = widx_.hull(c)) {
      anchors.push_back(h->first);
      anchors.push_back(h->second);
    }
    anchors.push_back(widx_.window().v_min);
    anchors.push_back(widx_.window().v_max + widx_.window().unit_level);
    if (c != 0) anchors.push_back(ord_p(c, p_));
    std::int64_t R_lo = *std::min_element(anchors.begin(), anchors.end()) - 1;
    std::int64_t R_hi = *std::max_element(anchors.begin(), anchors.end()) + 1;
    if (lo) R_lo = std::max(R_lo, *lo);
    if (hi) R_hi = std::min(R_hi, *hi);

    auto first_allowed = [&](std::int64_t r) { return r + floor_mod(o.phase - r, o.step); };
    std::vector<Item> items;
    std::int64_t r0 = first_allowed(R_lo);
    if (!lo && r0 - o.step >= std::numeric_limits<std::int32_t>::min()) items.push_back({r0 - o.step, true, false});
    std::int64_t last = r0;
    for (std::int64_t r = r0; r <= R_hi; r += o.step) {
      items.push_back({r, false, false});
      last = r;
    }
    if (!hi) items.push_back({last + o.step, false, true});

    const int Lc = std::max(L_, o.S);
    const std::uint64_t modS = ipow(p_, o.S);
    std::vector<std::uint64_t> classes;
    for (auto a : all_units(Lc))
      if (std::find(o.classes.begin(), o.classes.end(), a % modS) != o.classes.end()) classes.push_back(a);

    std::vector<std::vector<Sig>> sigs(items.size());
    for (std::size_t k = 0; k < items.size(); ++k)
      for (const auto& x : o.ex) sigs[k].push_back(signature(x, items[k].r));

    for (auto alpha : classes) {
      std::optional<std::size_t> run_start;
      auto close = [&](std::size_t end) {
        if (run_start) emit_family(o, alpha, Lc, items, *run_start, end, sigs[*run_start]);
        run_start.reset();
      };
      for (std::size_t k = 0; k < items.size(); ++k) {
        const Item& it = items[k];
        bool owned = it.tail_low || it.tail_high || !special.count({it.r, alpha % modS});
        bool good = std::all_of(sigs[k].begin(), sigs[k].end(), [](const Sig& s) { return s.good; });
        if (!owned) {
          if (run_start) close(k - 1);
          continue;
        }
        if (!good) {
          if (run_start) close(k - 1);
          if (it.tail_low || it.tail_high)
            throw Error("engine failure: no dominant term on the unbounded tail around " + to_string(c));
          thin(o, it.r, alpha, Lc, "thin-affine");
          continue;
        }
        if (run_start && sigs[*run_start] != sigs[k]) close(k - 1);
        if (!run_start) run_start = k;
      }
      if (run_start) close(items.size() - 1);
    }

    for (const auto& [key, cc] : special) {
      Rational a = c + pow_p(p_, key.first) * Rational(static_cast<unsigned long>(key.second));
      process_ball(a, key.first + o.S);
    }
  }

  void process_ball(const Rational& a, std::int64_t z) {
    Ball B{a, z};
    std::optional<Rational> owner;
    for (const auto& cc : centers_)
      if (B.contains(cc, p_) && (!owner || sample_less(cc, *owner, p_))) owner = cc;
    Owner o = make_owner(owner ? *owner : a);
    emit_point(o.c, owner ? "center" : "ball representative");
    o.S = 1;
    o.classes = all_units(1);
    o.step = 1;
    o.phase = 0;
    process_owner(o, z, std::nullopt, [&](const Rational& c) { return B.contains(c, p_); });
  }

  Cell family_cell(const Owner& o, std::uint64_t alpha, int Lc, const std::vector<Item>& items, std::size_t s,
                   std::size_t e) const {
    std::int64_t rlam = items[s].tail_low ? items[e].r : items[s].r;
    Rational lambda = pow_p(p_, rlam) * Rational(static_cast<unsigned long>(alpha));
    std::optional<std::int64_t> lo, hi;
    if (!items[s].tail_low) lo = items[s].r;
    if (!items[e].tail_high) hi = items[e].r;
    return Cell::annulus(o.c, lambda, Lc, static_cast<int>(o.step), lo, hi, p_);
  }

  void emit_family(const Owner& o, std::uint64_t alpha, int Lc, const std::vector<Item>& items, std::size_t s,
                   std::size_t e, const std::vector<Sig>& sig) {
    PreparedCell pc;
    pc.cell = family_cell(o, alpha, Lc, items, s, e);
    pc.ell = Lc;
    pc.thin = is_thin_syntactic(pc.cell, p_);
    pc.provenance = "dominant-term";
    for (const auto& sg : sig) {
      CellApproximation ap;
      ap.d = sg.d;
      ap.m = FractionalMonomial::integral(o.c, sg.e, sg.a);
      pc.fns.push_back(ap);
    }
    if (certify(pc)) {
      out_.cells.push_back(pc);
      return;
    }
    out_.log.push_back("dominant-term family at " + to_string(o.c) + " class " + std::to_string(alpha) +
                       " failed certification; refined into thin balls");
    // Radii carrying window points are split into thin balls; the rest of the
    // run stays a family certified on synthetic points.
    auto h = widx_.hull(o.c);
    std::optional<std::size_t> rest_start;
    auto flush = [&](std::size_t end) {
      if (!rest_start) return;
      PreparedCell rc = pc;
      rc.cell = family_cell(o, alpha, Lc, items, *rest_start, end);
      rc.thin = is_thin_syntactic(rc.cell, p_);
      rc.provenance = "dominant-term (beyond window)";
      if (!certify(rc))
        throw Error("engine failure: family at " + to_string(o.c) + " fails beyond the window resolution");
      out_.cells.push_back(rc);
      rest_start.reset();
    };
    for (std::size_t k = s; k <= e; ++k) {
      bool sampled = !items[k].tail_low && !items[k].tail_high && h && items[k].r >= h->first &&
                     items[k].r <= h->second;
      if (sampled) {
        if (rest_start) flush(k - 1);
        thin(o, items[k].r, alpha, Lc, "thin-affine");
      } else if (!rest_start) {
        rest_start = k;
      }
      if (k == e) flush(e);
    }
  }

  // Affine model of f at t0 valid on B(t0, R): linear Taylor term dominates.
  bool affine_valid(const Expansion& x, const Rational& t0, std::int64_t R) const {
    Rational q0 = x.Q.eval(t0);
    if (q0 == 0) return false;
    Rational f0 = x.P.eval(t0) / q0;
    Poly N = (x.P - f0 * x.Q).taylor_at(t0);
    Poly Qt = x.Q.taylor_at(t0);
    std::int64_t M = n_ + 2 + (p_ == 2 ? 1 : 0);
    auto i = dominant(N, R, M, p_);
    auto k = dominant(Qt, R, M, p_);
    return i && *i == 1 && k && *k == 0;
  }

  void thin(const Owner& o, std::int64_t r, std::uint64_t alpha, int Lt, const std::string& why) {
    Rational lambda = pow_p(p_, r) * Rational(static_cast<unsigned long>(alpha));
    Cell A = Cell::annulus(o.c, lambda, Lt, 1, r, r, p_);
    std::vector<Rational> pts = widx_.in_cell(A);
    Rational t0 = pts.empty() ? Rational(o.c + lambda) : pts.front();
    bool all_valid = true;
    for (const auto& x : o.ex)
      if (!affine_valid(x, t0, r + Lt)) all_valid = false;
    if (!all_valid && pts.size() > 1) {
      for (std::uint64_t b = 0; b < p_; ++b) thin(o, r, alpha + b * ipow(p_, Lt), Lt + 1, why);
      return;
    }
    PreparedCell pc;
    pc.cell = A;
    pc.ell = Lt;
    pc.thin = true;
    pc.provenance = all_valid ? why : (pts.empty() ? "unsampled" : "window-resolution");
    for (std::size_t j = 0; j < fs_.size(); ++j) {
      CellApproximation ap;
      Rational f0 = eval_exact(fs_[j], t0, p_);
      Rational b1 = 0;
      PiecewiseFunction df = differentiate(fs_[j]);
      try {
        b1 = eval_exact(df, t0, p_);
      } catch (const PoleError&) {
        b1 = 0;
      }
      ap.d = f0 - b1 * (t0 - o.c);
      ap.m = FractionalMonomial::integral(o.c, b1, b1 == 0 ? 0 : 1);
      pc.fns.push_back(ap);
    }
    if (!certify(pc)) {
      if (pts.size() > 1) {
        for (std::uint64_t b = 0; b < p_; ++b) thin(o, r, alpha + b * ipow(p_, Lt), Lt + 1, why);
        return;
      }
      // No window point: the synthetic points lie off the affine model, and
      // the window check is vacuous.
      if (!pts.empty() || !certify(pc, true))
        throw Error("engine failure: thin ball at " + to_string(t0) + " failed certification");
      pc.provenance = "unsampled";
      out_.log.push_back("thin ball at " + to_string(t0) + " has no window point and fails on synthetic points");
    }
    out_.cells.push_back(pc);
  }
};

std::vector<Rational> region_centers(const std::vector<RationalFunction>& bodies,
                                     const std::vector<PiecewiseFunction>& fs, int digits, std::uint64_t p) {
  std::vector<Rational> out;
  auto add_roots = [&](const Poly& f) {
    if (f.degree() < 1) return;
    for (const auto& r : qp_root_approximations(f, p, digits)) out.push_back(r);
  };
  for (const auto& b : bodies) {
    Poly P = b.num, Q = b.den;
    add_roots(P);
    add_roots(Q);
    add_roots(P.derivative() * Q - P * Q.derivative());
  }
  for (const auto& f : fs)
    for (const auto& piece : f.pieces)
      for (const auto& q : inverted_subterms(piece.body)) add_roots(q);
  std::sort(out.begin(), out.end(), [p](const Rational& a, const Rational& b) { return sample_less(a, b, p); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool same_guards(const PiecewiseFunction& a, const PiecewiseFunction& b) {
  if (a.pieces.size() != b.pieces.size()) return false;
  for (std::size_t i = 0; i < a.pieces.size(); ++i)
    if (print(a.pieces[i].guard) != print(b.pieces[i].guard)) return false;
  return true;
}

bool trivially_guarded(const PiecewiseFunction& f) { return f.pieces.size() == 1 && f.pieces[0].guard.all; }

}  // namespace

std::vector<Rational> certification_sample(const Cell& A, const Window& W, std::uint64_t p, std::string* kind) {
  return certification_sample(A, WindowIndex(W, p), kind);
}

std::vector<Rational> certification_sample(const Cell& A, const WindowIndex& idx, std::string* kind) {
  const std::uint64_t p = idx.prime();
  if (A.is_point()) {
    if (kind) *kind = "point";
    return {A.center};
  }
  std::vector<Rational> pts = idx.in_cell(A);
  if (!pts.empty()) {
    if (kind) *kind = "window";
    return pts;
  }
  if (kind) *kind = "synthetic";
  auto lo = A.ord_min(p), hi = A.ord_max(p);
  const std::int64_t lam = ord_p(A.lambda, p);
  std::vector<std::int64_t> radii;
  if (lo) {
    std::int64_t r = *lo + floor_mod(lam - *lo, A.n);
    for (int i = 0; i < 2; ++i, r += A.n)
      if (!hi || r <= *hi) radii.push_back(r);
  } else if (hi) {
    std::int64_t r = *hi - floor_mod(*hi - lam, A.n);
    radii.push_back(r);
    radii.push_back(r - A.n);
  } else {
    radii.push_back(lam);
    radii.push_back(lam + A.n);
  }
  const std::uint64_t unit = ac_exact(A.lambda, p, A.m);
  const std::uint64_t stride = ipow(p, A.m);
  std::vector<Rational> out;
  for (auto r : radii)
    for (std::uint64_t j = 0; j < p * p; ++j)
      out.push_back(A.center + pow_p(p, r) * Rational(static_cast<unsigned long>(unit + j * stride)));
  return out;
}

PiecewiseFunction monomial_function(const Rational& d, const FractionalMonomial& m) {
  if (m.b != 1) throw PreconditionError("only integral exponents can be turned into functions");
  ExprPtr body;
  if (m.coefficient == 0 || m.a == 0) {
    body = ex::constant(d + (m.a == 0 ? m.coefficient : Rational(0)));
  } else {
    ExprPtr s = m.center == 0 ? ex::var() : ex::sub(ex::var(), ex::constant(m.center));
    ExprPtr term = m.a == 1 ? s : ex::pow(s, m.a);
    if (m.coefficient != 1) term = ex::mul(ex::constant(m.coefficient), term);
    body = d == 0 ? term : ex::add(ex::constant(d), term);
  }
  PiecewiseFunction f;
  f.pieces.push_back({Guard::everything(), body});
  return f;
}

Partition prepare(const std::vector<PiecewiseFunction>& fs, int n, const Guard& domain, const Window& W,
                  const FieldContext& ctx) {
  if (n < 1) throw PreconditionError("level n must be at least 1");
  if (fs.empty()) throw PreconditionError("no functions to prepare");
  const std::uint64_t p = ctx.p;
  Partition out;
  out.n = n;
  const WindowIndex widx(W, p);
  const int digits = static_cast<int>(W.v_max - W.v_min) + W.unit_level + n + 8;

  const PiecewiseFunction* pattern = nullptr;
  for (const auto& f : fs)
    if (!trivially_guarded(f)) {
      if (pattern && !same_guards(*pattern, f))
        throw PreconditionError("functions with different guards cannot be prepared together");
      pattern = &f;
    }
  if (pattern && !domain.all)
    throw PreconditionError("a restricted domain needs functions defined by a single {all} piece");

  struct Task {
    Cell region;
    bool line = false;
    std::size_t piece = 0;
  };
  std::vector<Task> tasks;
  if (pattern) {
    for (std::size_t i = 0; i < pattern->pieces.size(); ++i)
      for (const auto& G : guard_cells(pattern->pieces[i].guard, p)) tasks.push_back({G, false, i});
  } else if (domain.all) {
    tasks.push_back({Cell::point(0), true, 0});
  } else {
    for (const auto& G : guard_cells(domain, p)) tasks.push_back({G, false, 0});
  }

  for (const auto& task : tasks) {
    std::vector<RationalFunction> bodies;
    for (const auto& f : fs)
      bodies.push_back(to_rational_function(trivially_guarded(f) ? f.pieces[0].body : f.pieces[task.piece].body));
    std::vector<Rational> centers = region_centers(bodies, fs, digits, p);
    Engine engine(fs, n, widx, ctx, out);
    std::size_t before = out.cells.size();
    if (task.line)
      engine.run_region_line(bodies, centers);
    else
      engine.run_region_cell(bodies, centers, task.region);
    std::string where = task.line ? std::string("whole line") : "region centered at " + to_string(task.region.center);
    out.log.push_back(where + ": " + std::to_string(out.cells.size() - before) + " cells, " +
                      std::to_string(centers.size()) + " candidate centers");
  }
  return out;
}

PropertyReport check_tiling(const Partition& P, const Guard& domain, const Window& W, std::uint64_t p) {
  PropertyReport rep;
  rep.property = "tiling";
  rep.window = W;
  std::vector<Rational> pts = window_points(W, p);
  // membership via per-center (ord, unit) tables
  std::map<Rational, std::vector<std::size_t>> by_center;
  for (std::size_t i = 0; i < P.cells.size(); ++i) by_center[P.cells[i].cell.center].push_back(i);
  std::vector<int> count(pts.size(), 0);
  for (const auto& [c, cells] : by_center) {
    int level = 1;
    for (auto i : cells) level = std::max(level, P.cells[i].cell.m);
    struct Pre {
      bool zero;
      std::int64_t o;
      std::uint64_t unit;
    };
    std::vector<Pre> pre(pts.size());
    for (std::size_t t = 0; t < pts.size(); ++t) {
      Rational s = pts[t] - c;
      if (s == 0)
        pre[t] = {true, 0, 0};
      else
        pre[t] = {false, ord_p(s, p), ac_exact(s, p, level)};
    }
    for (auto i : cells) {
      const Cell& A = P.cells[i].cell;
      if (A.is_point()) {
        for (std::size_t t = 0; t < pts.size(); ++t) count[t] += pre[t].zero ? 1 : 0;
        continue;
      }
      auto lo = A.ord_min(p), hi = A.ord_max(p);
      std::int64_t lam = ord_p(A.lambda, p);
      std::uint64_t mod = ipow(p, A.m), want = ac_exact(A.lambda, p, A.m);
      for (std::size_t t = 0; t < pts.size(); ++t) {
        const Pre& q = pre[t];
        if (q.zero || (lo && q.o < *lo) || (hi && q.o > *hi) || floor_mod(q.o - lam, A.n) != 0) continue;
        if (q.unit % mod == want) ++count[t];
      }
    }
  }
  for (std::size_t t = 0; t < pts.size(); ++t) {
    ++rep.checked_points;
    int expected = domain.contains(pts[t], p) ? 1 : 0;
    if (count[t] != expected) {
      rep.fail({pts[t], pts[t], "cells containing t: " + std::to_string(count[t]),
                "expected " + std::to_string(expected), "tiling"});
      return rep;
    }
  }
  return rep;
}

// ---------------------------------------------------------------- classical

namespace {

struct RVKey {
  bool zero;
  std::int64_t v;
  std::uint64_t ac;
  friend bool operator==(const RVKey&, const RVKey&) = default;
};

RVKey rv_key(const Rational& x, std::uint64_t p, int n) {
  if (x == 0) return {true, 0, 0};
  RVElement r = rv_exact(x, p, n);
  return {false, r.valuation, r.ac};
}

bool rv_matches(const PiecewiseFunction& f, const std::vector<Rational>& pts, const FractionalMonomial& m, int n,
                std::uint64_t p) {
  for (const auto& t : pts)
    if (!(rv_key(eval_exact(f, t, p), p, n) == rv_key(*monomial_exact(m, t), p, n))) return false;
  return true;
}

// Splits A into single-valuation cells, refining the coset until rv_n(f) is
// constant on each piece or the piece holds at most one window point.
void classical_refine(const std::vector<PiecewiseFunction>& fs, const Cell& A, int n, const WindowIndex& idx,
                      std::vector<ClassicalCell>& out) {
  const std::uint64_t p = idx.prime();
  std::vector<Rational> pts = idx.in_cell(A);
  bool ok = true;
  std::vector<FractionalMonomial> mons;
  std::vector<std::string> rules;
  Rational t0 = pts.empty() ? Rational(A.center + A.lambda) : pts.front();
  for (const auto& f : fs) {
    FractionalMonomial c = FractionalMonomial::constant(eval_exact(f, t0, p));
    if (!rv_matches(f, pts, c, n, p)) ok = false;
    mons.push_back(c);
    rules.push_back("refined");
  }
  auto lo = A.ord_min(p), hi = A.ord_max(p);
  bool single = lo && hi && *lo == *hi;
  if (ok && (single || pts.size() <= 1)) {
    out.push_back({A, mons, rules, "refined"});
    return;
  }
  if (!single) {
    if (!lo || !hi) throw Error("classical refinement cannot split an unbounded cell");
    std::int64_t lam = ord_p(A.lambda, p);
    for (std::int64_t r = *lo; r <= *hi; ++r) {
      if (floor_mod(r - lam, A.n) != 0) continue;
      Rational l = pow_p(p, r) * Rational(static_cast<unsigned long>(ac_exact(A.lambda, p, A.m)));
      classical_refine(fs, Cell::annulus(A.center, l, A.m, 1, r, r, p), n, idx, out);
    }
    return;
  }
  std::uint64_t base = ac_exact(A.lambda, p, A.m);
  for (std::uint64_t b = 0; b < p; ++b) {
    Rational l = pow_p(p, *lo) * Rational(static_cast<unsigned long>(base + b * ipow(p, A.m)));
    classical_refine(fs, Cell::annulus(A.center, l, A.m + 1, 1, *lo, *lo, p), n, idx, out);
  }
}

}  // namespace

ClassicalPartition classical_decomposition(const std::vector<PiecewiseFunction>& fs, int n, const Guard& domain,
                                           const Window& W, const FieldContext& ctx) {
  const std::uint64_t p = ctx.p;
  Partition prep = prepare(fs, n, domain, W, ctx);
  ClassicalPartition out;
  out.report.property = "classical-rv";
  out.report.n = n;
  out.report.window = W;
  const WindowIndex idx(W, p);

  for (const auto& pc : prep.cells) {
    std::string kind;
    std::vector<Rational> pts = certification_sample(pc.cell, idx, &kind);
    ClassicalCell cc{pc.cell, {}, {}, pc.provenance};
    bool ok = true;
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const CellApproximation& ap = pc.fns[j];
      FractionalMonomial dm = FractionalMonomial::constant(ap.d);
      if (rv_matches(fs[j], pts, dm, n, p)) {
        cc.monomials.push_back(dm);
        cc.rule.push_back("center");
      } else if (rv_matches(fs[j], pts, ap.m, n, p)) {
        cc.monomials.push_back(ap.m);
        cc.rule.push_back("monomial");
      } else {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.cells.push_back(cc);
      continue;
    }
    // Split off the radii that carry window points; tails beyond them are
    // assigned by the rule that holds on their synthetic sample.
    const Cell& A = pc.cell;
    auto h = idx.hull(A.center);
    auto lo = A.ord_min(p), hi = A.ord_max(p);
    std::int64_t a = h ? h->first : 0, b = h ? h->second : -1;
    if (lo) a = std::max(a, *lo);
    if (hi) b = std::min(b, *hi);
    std::int64_t lam = ord_p(A.lambda, p);
    std::uint64_t unit = ac_exact(A.lambda, p, A.m);
    auto piece = [&](std::optional<std::int64_t> x, std::optional<std::int64_t> y) {
      std::int64_t r = x ? *x + floor_mod(lam - *x, A.n) : *y - floor_mod(*y - lam, A.n);
      return Cell::annulus(A.center, pow_p(p, r) * Rational(static_cast<unsigned long>(unit)), A.m, A.n, x, y, p);
    };
    std::vector<Cell> tails;
    if (h && a <= b) {
      classical_refine(fs, piece(a, b), n, idx, out.cells);
      if (!lo || *lo < a) tails.push_back(piece(lo, a - 1));
      if (!hi || *hi > b) tails.push_back(piece(b + 1, hi));
    } else {
      tails.push_back(A);
    }
    for (const auto& T : tails) {
      if (auto tl = T.ord_min(p), th = T.ord_max(p); tl && th && *tl > *th) continue;
      try {
        validate_cell(T, p);
      } catch (const PreconditionError&) {
        continue;
      }
      std::vector<Rational> tp = certification_sample(T, idx);
      ClassicalCell tc{T, {}, {}, pc.provenance + " (tail)"};
      for (std::size_t j = 0; j < fs.size(); ++j) {
        FractionalMonomial dm = FractionalMonomial::constant(pc.fns[j].d);
        if (rv_matches(fs[j], tp, dm, n, p)) {
          tc.monomials.push_back(dm);
          tc.rule.push_back("center");
        } else {
          tc.monomials.push_back(pc.fns[j].m);
          tc.rule.push_back("monomial");
        }
      }
      out.cells.push_back(tc);
    }
  }

  for (const auto& cc : out.cells) {
    std::vector<Rational> pts = certification_sample(cc.cell, idx);
    for (std::size_t j = 0; j < fs.size(); ++j)
      for (const auto& t : pts) {
        ++out.report.checked_points;
        RVKey a = rv_key(eval_exact(fs[j], t, p), p, n);
        RVKey b = rv_key(*monomial_exact(cc.monomials[j], t), p, n);
        if (!(a == b)) {
          out.report.fail({t, t, "rv_n f(t) = " + rv_exact(eval_exact(fs[j], t, p), p, n).to_string(),
                           "rv_n m(t) = " + rv_exact(*monomial_exact(cc.monomials[j], t), p, n).to_string(),
                           "classical"});
          return out;
        }
      }
  }
  return out;
}

UniquenessReport uniqueness_check(const PreparedCell& pc, const PiecewiseFunction& f, int n, const Window& W,
                                  const FieldContext& ctx, std::size_t index) {
  return uniqueness_check(pc, f, n, WindowIndex(W, ctx.p), ctx, index);
}

UniquenessReport uniqueness_check(const PreparedCell& pc, const PiecewiseFunction& f, int n, const WindowIndex& idx,
                                  const FieldContext& ctx, std::size_t index) {
  const std::uint64_t p = ctx.p;
  if (!pc.cell.unbounded()) throw PreconditionError("uniqueness is only claimed on unbounded cells");
  UniquenessReport out;
  out.report.property = "uniqueness";
  out.report.n = n;
  out.report.window = idx.window();
  const CellApproximation& ap = pc.fns.at(index);
  std::vector<Rational> sample = certification_sample(pc.cell, idx);
  CompatibilityReport fc = check_n_compatible_on(f, pc.cell, n, sample, ctx, ap.d);
  PiecewiseFunction df = differentiate(f);
  std::vector<RVKey> fd;
  for (const auto& t : sample) fd.push_back(rv_key(eval_exact(df, t, p), p, n));

  std::vector<Rational> panel;
  const std::uint64_t top = ipow(p, n);
  Rational base = ap.m.coefficient == 0 ? Rational(1) : ap.m.coefficient;
  for (std::uint64_t w = 2; w < top; ++w)
    if (w % p != 0) panel.push_back(base * Rational(static_cast<unsigned long>(w)));
  panel.push_back(base * Rational(static_cast<unsigned long>(p)));
  panel.push_back(base / Rational(static_cast<unsigned long>(p)));
  for (const auto& e : panel) {
    FractionalMonomial m = ap.m;
    m.coefficient = e;
    if (ap.m.coefficient == 0) m.a = 0;
    ++out.perturbations;
    // a derivative mismatch already refutes equicompatibility
    bool refuted = false;
    if (m.a != 0) {
      PiecewiseFunction dg = differentiate(monomial_function(ap.d, m));
      for (std::size_t i = 0; i < sample.size() && !refuted; ++i) {
        refuted = !(rv_key(eval_exact(dg, sample[i], p), p, n) == fd[i]);
      }
    }
    if (!refuted) {
      auto rep = check_n_equicompatible_on(fc, f, monomial_function(ap.d, m), pc.cell, n, sample, ctx, ap.d);
      out.report.checked_pairs += rep.report.checked_pairs;
      refuted = !rep.report.pass;
    }
    if (refuted) {
      ++out.rejected;
    } else if (out.report.pass) {
      out.report.fail({pc.cell.center, pc.cell.center, "perturbed coefficient " + to_string(e),
                       "accepted as equicompatible", "uniqueness"});
    }
  }
  out.report.checked_points = sample.size();
  return out;
}

}  // namespace padicprep
