#pragma once

#include <string>
#include <vector>

#include "padicprep/geometry.hpp"

namespace padicprep::detail {

inline std::uint64_t int_residue(const Rational& y, std::uint64_t p, int D) {
  if (D <= 0) return 0;
  std::uint64_t mod = ipow(p, D);
  std::uint64_t num = mpz_fdiv_ui(y.get_num().get_mpz_t(), mod);
  std::uint64_t den = mpz_fdiv_ui(y.get_den().get_mpz_t(), mod);
  return mul_mod(num, inv_mod(den, mod), mod);
}

// rv_n with n = 0 degenerating to the valuation alone.
struct RVq {
  bool zero = true;
  std::int64_t v = 0;
  std::uint64_t ac = 0;

  friend bool operator==(const RVq& a, const RVq& b) {
    if (a.zero || b.zero) return a.zero == b.zero;
    return a.v == b.v && a.ac == b.ac;
  }
};

inline RVq rvq_exact(const Rational& x, std::uint64_t p, int n) {
  if (x == 0) return {};
  std::int64_t v = ord_p(x, p);
  return {false, v, int_residue(x * pow_p(p, -v), p, n)};
}

inline RVq rvq_mul(const RVq& a, const RVq& b, std::uint64_t p, int n) {
  if (a.zero || b.zero) return {};
  std::uint64_t mod = ipow(p, n);
  return {false, a.v + b.v, mod == 1 ? 0 : mul_mod(a.ac, b.ac, mod)};
}

inline std::string rvq_string(const RVq& r, std::uint64_t p, int n) {
  if (r.zero) return "0";
  if (n == 0) return "ord " + std::to_string(r.v);
  return RVElement{false, r.v, r.ac, n, p}.to_string();
}

// Values scaled to be p-integral and reduced modulo p^P, so that rv of a
// difference is usually read off 64-bit residues; exact arithmetic is the
// fallback when too few digits survive.
class ScaledResidues {
 public:
  ScaledResidues(const std::vector<Rational>& values, std::uint64_t p) : values_(values), p_(p) {
    P_ = 1;
    while (P_ < 60 && ipow_fits(P_ + 1)) ++P_;
    mod_ = ipow(p, P_);
    bool any = false;
    for (const auto& x : values)
      if (x != 0) {
        std::int64_t o = ord_p(x, p);
        if (!any || o < shift_) shift_ = o;
        any = true;
      }
    Rational scale = pow_p(p, -shift_);
    r_.reserve(values.size());
    for (const auto& x : values) r_.push_back(x == 0 ? 0 : int_residue(x * scale, p, P_));
  }

  RVq diff(std::size_t i, std::size_t j, int n) const {
    std::uint64_t d = r_[i] >= r_[j] ? r_[i] - r_[j] : mod_ - (r_[j] - r_[i]);
    if (d != 0) {
      int o = 0;
      while (d % p_ == 0) {
        d /= p_;
        ++o;
      }
      if (o + n <= P_) return {false, o + shift_, n == 0 ? 0 : d % ipow(p_, n)};
    }
    return rvq_exact(values_[i] - values_[j], p_, n);
  }

 private:
  bool ipow_fits(int e) const {
    unsigned __int128 v = 1;
    for (int i = 0; i < e; ++i) {
      v *= p_;
      if (v >= (static_cast<unsigned __int128>(1) << 62)) return false;
    }
    return true;
  }

  const std::vector<Rational>& values_;
  std::uint64_t p_;
  int P_ = 1;
  std::uint64_t mod_ = 1;
  std::int64_t shift_ = 0;
  std::vector<std::uint64_t> r_;
};

}  // namespace padicprep::detail
