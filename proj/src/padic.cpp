#include "padicprep/padic.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <utility>

namespace padicprep {

namespace {

constexpr std::uint64_t kUnitLimit = std::uint64_t{1} << 62;

void require_same_prime(const PadicNumber& x, const PadicNumber& y) {
  if (x.prime() != y.prime()) throw PreconditionError("operands live in different fields");
}

std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  std::int64_t r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t pow_mod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m) {
  __int128 t = 0, nt = 1;
  __int128 r = m, nr = a % m;
  while (nr != 0) {
    __int128 q = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - q * nt);
    std::tie(r, nr) = std::make_pair(nr, r - q * nr);
  }
  if (r != 1) throw PreconditionError("residue is not invertible");
  if (t < 0) t += m;
  return static_cast<std::uint64_t>(t);
}

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > kUnitLimit / base) throw PreconditionError("p^e exceeds the 62-bit unit range");
    r *= base;
  }
  return r;
}

int ord_p(std::uint64_t x, std::uint64_t p) {
  if (x == 0) throw PreconditionError("ord_p of zero");
  int v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return v;
}

FieldContext FieldContext::make(std::uint64_t p, int precision) {
  if (!is_prime(p)) throw PreconditionError("p = " + std::to_string(p) + " is not prime");
  if (precision < 1) throw PreconditionError("precision must be at least 1");
  ipow(p, precision);  // range check
  return FieldContext{p, p, precision};
}

std::uint64_t FieldContext::power(int e) const { return ipow(p, e); }

PadicNumber PadicNumber::zero(const FieldContext& ctx) {
  PadicNumber z;
  z.p_ = ctx.p;
  z.precision_ = ctx.precision;
  z.cap_ = ctx.precision;
  return z;
}

PadicNumber PadicNumber::from_parts(const FieldContext& ctx, std::int64_t valuation, std::uint64_t unit,
                                    int precision) {
  if (precision < 1) throw PrecisionError("no significant digits");
  if (precision > ctx.precision) precision = ctx.precision;
  std::uint64_t mod = ctx.power(precision);
  unit %= mod;
  if (unit % ctx.p == 0) throw PreconditionError("unit part divisible by p");
  PadicNumber x;
  x.p_ = ctx.p;
  x.valuation_ = valuation;
  x.unit_ = unit;
  x.precision_ = precision;
  x.cap_ = ctx.precision;
  x.zero_ = false;
  return x;
}

bool operator==(const PadicNumber& a, const PadicNumber& b) {
  if (a.p_ != b.p_) return false;
  if (a.zero_ || b.zero_) return a.zero_ == b.zero_;
  if (a.valuation_ != b.valuation_) return false;
  std::uint64_t mod = ipow(a.p_, std::min(a.precision_, b.precision_));
  return a.unit_ % mod == b.unit_ % mod;
}

std::string PadicNumber::digits() const {
  if (zero_) return "0";
  std::string s = std::to_string(valuation_) + ":";
  std::uint64_t u = unit_;
  for (int i = 0; i < precision_; ++i) {
    if (p_ > 10 && i > 0) s += ',';
    s += std::to_string(u % p_);
    u /= p_;
  }
  return s;
}

PadicNumber from_rational(const Rational& x, const FieldContext& ctx) {
  if (x == 0) return PadicNumber::zero(ctx);
  Integer num = x.get_num();
  Integer den = x.get_den();
  Integer pp = static_cast<unsigned long>(ctx.p);
  std::int64_t v = 0;
  while (mpz_divisible_p(num.get_mpz_t(), pp.get_mpz_t())) {
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), pp.get_mpz_t());
    ++v;
  }
  while (mpz_divisible_p(den.get_mpz_t(), pp.get_mpz_t())) {
    mpz_divexact(den.get_mpz_t(), den.get_mpz_t(), pp.get_mpz_t());
    --v;
  }
  Integer mod = static_cast<unsigned long>(ctx.power(ctx.precision));
  Integer u;
  mpz_invert(u.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t());
  u *= num;
  mpz_fdiv_r(u.get_mpz_t(), u.get_mpz_t(), mod.get_mpz_t());
  return PadicNumber::from_parts(ctx, v, u.get_ui(), ctx.precision);
}

PadicNumber from_rational(long numerator, long denominator, const FieldContext& ctx) {
  return from_rational(make_rational(numerator, denominator), ctx);
}

PadicNumber add(const PadicNumber& x, const PadicNumber& y) {
  require_same_prime(x, y);
  if (x.zero_) return y;
  if (y.zero_) return x;
  const PadicNumber& a = x.valuation_ <= y.valuation_ ? x : y;
  const PadicNumber& b = x.valuation_ <= y.valuation_ ? y : x;
  const std::uint64_t p = a.p_;
  std::int64_t abs_prec = std::min(a.valuation_ + a.precision_, b.valuation_ + b.precision_);
  std::int64_t shift = b.valuation_ - a.valuation_;
  if (shift >= abs_prec - a.valuation_) {
    PadicNumber r = a;
    r.precision_ = static_cast<int>(abs_prec - a.valuation_);
    if (r.precision_ < 1) throw PrecisionError("addition lost every significant digit");
    return r;
  }
  int rel = static_cast<int>(abs_prec - a.valuation_);
  std::uint64_t mod = ipow(p, rel);
  std::uint64_t w = (a.unit_ % mod + mul_mod(ipow(p, static_cast<int>(shift)), b.unit_, mod)) % mod;
  if (w == 0) {
    if (a.valuation_ == b.valuation_ && a.precision_ == b.precision_) {
      PadicNumber z;
      z.p_ = p;
      z.precision_ = a.precision_;
      z.cap_ = a.cap_;
      z.cancelled_ = true;
      return z;
    }
    throw PrecisionError("cancellation exhausted the tracked precision");
  }
  int t = ord_p(w, p);
  PadicNumber r;
  r.p_ = p;
  r.zero_ = false;
  r.valuation_ = a.valuation_ + t;
  r.unit_ = w / ipow(p, t);
  r.precision_ = rel - t;
  r.cap_ = std::max(a.cap_, b.cap_);
  return r;
}

PadicNumber neg(const PadicNumber& x) {
  if (x.zero_) return x;
  PadicNumber r = x;
  std::uint64_t mod = ipow(x.p_, x.precision_);
  r.unit_ = (mod - x.unit_ % mod) % mod;
  return r;
}

PadicNumber sub(const PadicNumber& x, const PadicNumber& y) { return add(x, neg(y)); }

PadicNumber mul(const PadicNumber& x, const PadicNumber& y) {
  require_same_prime(x, y);
  if (x.zero_) return x;
  if (y.zero_) return y;
  PadicNumber r;
  r.p_ = x.p_;
  r.zero_ = false;
  r.valuation_ = x.valuation_ + y.valuation_;
  r.precision_ = std::min(x.precision_, y.precision_);
  r.cap_ = std::max(x.cap_, y.cap_);
  r.unit_ = mul_mod(x.unit_, y.unit_, ipow(x.p_, r.precision_));
  return r;
}

PadicNumber inv(const PadicNumber& x) {
  if (x.zero_) return x;
  PadicNumber r = x;
  r.valuation_ = -x.valuation_;
  r.unit_ = inv_mod(x.unit_, ipow(x.p_, x.precision_));
  return r;
}

PadicNumber pow(const PadicNumber& x, std::int64_t e) {
  if (e < 0) return inv(pow(x, -e));
  if (e == 0) {
    // 0^0 = 1
    PadicNumber one;
    one.p_ = x.p_;
    one.zero_ = false;
    one.unit_ = 1;
    one.precision_ = x.cap_;
    one.cap_ = x.cap_;
    return one;
  }
  if (x.zero_) return x;
  // (r + d)^e - r^e gains ord_p(e) digits over d.
  PadicNumber r = x;
  r.valuation_ = x.valuation_ * e;
  r.precision_ = std::min(x.cap_, x.precision_ + ord_p(static_cast<std::uint64_t>(e), x.p_));
  r.unit_ = pow_mod(x.unit_, static_cast<std::uint64_t>(e), ipow(x.p_, r.precision_));
  return r;
}

std::optional<std::int64_t> ord(const PadicNumber& x) {
  if (x.is_zero()) return std::nullopt;
  return x.valuation();
}

Rational norm(const PadicNumber& x) {
  if (x.is_zero()) return Rational(0);
  return pow_p(x.prime(), -x.valuation());
}

std::uint64_t ac(const PadicNumber& x, int m) {
  if (m < 1) throw PreconditionError("ac level must be positive");
  if (x.is_zero()) return 0;
  if (m > x.precision())
    throw PrecisionError("ac_" + std::to_string(m) + " needs more than the " + std::to_string(x.precision()) +
                         " tracked digits");
  return x.unit() % ipow(x.prime(), m);
}

bool operator==(const RVElement& a, const RVElement& b) {
  if (a.zero || b.zero) return a.zero == b.zero;
  return a.valuation == b.valuation && a.ac == b.ac && a.level == b.level && a.p == b.p;
}

RVElement operator*(const RVElement& a, const RVElement& b) {
  if (a.p != b.p || a.level != b.level) throw PreconditionError("rv elements of different levels");
  if (a.zero) return a;
  if (b.zero) return b;
  return {false, a.valuation + b.valuation, mul_mod(a.ac, b.ac, ipow(a.p, a.level)), a.level, a.p};
}

std::string RVElement::to_string() const {
  if (zero) return "0";
  return "(" + std::to_string(valuation) + "," + std::to_string(ac) + ")";
}

RVElement rv(const PadicNumber& x, int n) {
  if (x.is_zero()) return RVElement::make_zero(x.prime(), n);
  return {false, x.valuation(), ac(x, n), n, x.prime()};
}

bool in_Qmn(const PadicNumber& x, int m, int n) {
  if (x.is_zero()) throw PreconditionError("Q_{m,n} membership of zero");
  if (n < 1) throw PreconditionError("n must be positive");
  return floor_mod(x.valuation(), n) == 0 && ac(x, m) == 1 % ipow(x.prime(), m);
}

bool coset_member(const PadicNumber& x, const PadicNumber& lambda, int m, int n) {
  if (lambda.is_zero()) return x.is_zero();
  if (x.is_zero()) return false;
  return in_Qmn(mul(x, inv(lambda)), m, n);
}

bool is_nth_power(const PadicNumber& x, std::uint64_t l) {
  if (x.is_zero()) throw PreconditionError("P_l membership of zero");
  if (l == 0) throw PreconditionError("l must be positive");
  if (floor_mod(x.valuation(), static_cast<std::int64_t>(l)) != 0) return false;
  int level = 2 * ord_p(l, x.prime()) + 1;
  if (x.precision() < level) throw PrecisionError("P_l test needs " + std::to_string(level) + " digits");
  std::uint64_t mod = ipow(x.prime(), level);
  std::uint64_t target = x.unit() % mod;
  for (std::uint64_t a = 1; a < mod; ++a) {
    if (a % x.prime() == 0) continue;
    if (pow_mod(a, l, mod) == target) return true;
  }
  return false;
}

namespace {

// Lifts a, with a^b = u mod p^{2w+1}, to r mod p^target with r^b = u mod p^{target+w}.
std::uint64_t lift_root(std::uint64_t a, std::uint64_t u, std::uint64_t b, std::uint64_t p, int w, int target) {
  std::uint64_t r = a % ipow(p, w + 1);
  for (int j = w + 1; j < target; ++j) {
    std::uint64_t mod = ipow(p, j + 1 + w);
    std::uint64_t step = ipow(p, j);
    bool found = false;
    for (std::uint64_t d = 0; d < p; ++d) {
      std::uint64_t cand = r + d * step;
      if (pow_mod(cand, b, mod) == u % mod) {
        r = cand;
        found = true;
        break;
      }
    }
    if (!found) throw Error("Hensel lifting failed to find the next digit");
  }
  return r;
}

}  // namespace

std::optional<PadicNumber> hensel_root(const PadicNumber& x, std::uint64_t b, RootBranch branch) {
  if (x.is_zero()) throw PreconditionError("root of zero");
  if (b == 0) throw PreconditionError("root degree must be positive");
  const std::uint64_t p = x.prime();
  if (floor_mod(x.valuation(), static_cast<std::int64_t>(b)) != 0) return std::nullopt;
  int w = ord_p(b, p);
  int level = 2 * w + 1;
  if (x.precision() < level) throw PrecisionError("root extraction needs " + std::to_string(level) + " digits");
  int target = x.precision() - w;
  if (branch.level < 1 || branch.level > target)
    throw PrecisionError("branch level exceeds the precision of the root");
  std::uint64_t mod = ipow(p, level);
  std::uint64_t u = x.unit();
  std::uint64_t branch_mod = ipow(p, branch.level);
  for (std::uint64_t a = 1; a < mod; ++a) {
    if (a % p == 0 || pow_mod(a, b, mod) != u % mod) continue;
    std::uint64_t r = lift_root(a, u, b, p, w, target);
    if (r % branch_mod != branch.residue % branch_mod) continue;
    FieldContext ctx{p, p, x.cap()};
    return PadicNumber::from_parts(ctx, x.valuation() / static_cast<std::int64_t>(b), r, target);
  }
  return std::nullopt;
}

std::vector<std::uint64_t> root_branches(const PadicNumber& x, std::uint64_t b, int level) {
  std::vector<std::uint64_t> out;
  const std::uint64_t mod = ipow(x.prime(), level);
  for (std::uint64_t a = 1; a < mod; ++a) {
    if (a % x.prime() == 0) continue;
    if (hensel_root(x, b, {a, level})) out.push_back(a);
  }
  return out;
}

}  // namespace padicprep
