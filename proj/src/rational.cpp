#include "padicprep/rational.hpp"

#include <cctype>

namespace padicprep {

Rational make_rational(long num, long den) {
  if (den == 0) throw PreconditionError("zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

std::int64_t ord_p(const Integer& x, std::uint64_t p) {
  if (x == 0) throw PreconditionError("ord_p of zero");
  Integer q = x;
  Integer pp = static_cast<unsigned long>(p);
  std::int64_t v = 0;
  while (mpz_divisible_p(q.get_mpz_t(), pp.get_mpz_t())) {
    mpz_divexact(q.get_mpz_t(), q.get_mpz_t(), pp.get_mpz_t());
    ++v;
  }
  return v;
}

std::int64_t ord_p(const Rational& x, std::uint64_t p) {
  if (x == 0) throw PreconditionError("ord_p of zero");
  return ord_p(x.get_num(), p) - ord_p(x.get_den(), p);
}

Rational pow_p(std::uint64_t p, std::int64_t e) {
  Integer base = static_cast<unsigned long>(p);
  Integer pe;
  mpz_pow_ui(pe.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e < 0 ? -e : e));
  if (e >= 0) return Rational(pe);
  Rational r(Integer(1), pe);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!is_int(num) || !is_int(den) || den.front() == '-' || den.front() == '+')
    throw Error("malformed rational '" + std::string(text) + "'");
  Integer n(std::string(num.front() == '+' ? num.substr(1) : num));
  Integer d{std::string(den)};
  if (d == 0) throw PreconditionError("zero denominator in '" + std::string(text) + "'");
  Rational r(n, d);
  r.canonicalize();
  return r;
}

}  // namespace padicprep
