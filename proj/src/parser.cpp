#include <cctype>

#include "padicprep/expr.hpp"

namespace padicprep {

namespace {

enum class Tok { Num, Ident, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int col = 0;  // 0-based offset
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    int col = static_cast<int>(i);
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Num, s.substr(i, j - i), col});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), col});
      i = j;
    } else if ((c == '>' || c == '<') && i + 1 < s.size() && s[i + 1] == '=') {
      out.push_back({Tok::Sym, s.substr(i, 2), col});
      i += 2;
    } else if (std::string("+-*/^(){}[];,=<>").find(c) != std::string::npos) {
      out.push_back({Tok::Sym, std::string(1, c), col});
      ++i;
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", col);
    }
  }
  out.push_back({Tok::End, "", static_cast<int>(s.size())});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  PiecewiseFunction function() {
    PiecewiseFunction f;
    f.pieces.push_back(piece());
    while (accept(";")) {
      if (peek().kind == Tok::End) break;
      f.pieces.push_back(piece());
    }
    expect_end();
    return f;
  }

  ExprPtr single_expr() {
    ExprPtr e = expr();
    expect_end();
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool is_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool is_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  bool accept(const char* s) {
    if (!is_sym(s)) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(what + ", found " + got, t.col);
  }

  void expect(const char* s) {
    if (!accept(s)) fail(std::string("expected '") + s + "'");
  }

  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected token");
  }

  Integer integer() {
    if (peek().kind != Tok::Num) fail("expected an integer");
    return Integer(next().text);
  }

  std::int64_t small_int() {
    bool negative = accept("-");
    Integer v = integer();
    if (!v.fits_slong_p()) fail("integer out of range");
    return negative ? -v.get_si() : v.get_si();
  }

  Rational rational_literal() {
    bool negative = accept("-");
    Integer num = integer();
    Integer den = 1;
    if (is_sym("/") && toks_[pos_ + 1].kind == Tok::Num) {
      ++pos_;
      den = integer();
      if (den == 0) fail("zero denominator");
    }
    Rational r(num, den);
    r.canonicalize();
    return negative ? Rational(-r) : r;
  }

  Piece piece() {
    ExprPtr body = expr();
    Guard g = Guard::everything();
    if (is_ident("on")) {
      ++pos_;
      g = guard();
    }
    return {g, body};
  }

  // ---- expressions

  ExprPtr expr() {
    int begin = peek().col;
    ExprPtr e = term();
    while (is_sym("+") || is_sym("-")) {
      bool plus = next().text == "+";
      ExprPtr r = term();
      SourceSpan span{begin, toks_[pos_ - 1].col};
      e = plus ? ex::add(e, r, span) : ex::sub(e, r, span);
    }
    return e;
  }

  ExprPtr term() {
    int begin = peek().col;
    ExprPtr e = unary();
    while (is_sym("*") || is_sym("/")) {
      bool times = next().text == "*";
      ExprPtr r = unary();
      SourceSpan span{begin, toks_[pos_ - 1].col};
      e = times ? ex::mul(e, r, span) : ex::mul(e, ex::inv(r, false, r->span), span);
    }
    return e;
  }

  ExprPtr unary() {
    int begin = peek().col;
    if (accept("-")) {
      if (peek().kind == Tok::Num) {
        int lit = peek().col;
        Rational r = rational_literal();
        if (is_sym("^")) {
          ExprPtr base = ex::constant(r, {lit, toks_[pos_ - 1].col});
          return ex::neg(power_suffix(base, lit), {begin, toks_[pos_ - 1].col});
        }
        return ex::constant(-r, {begin, toks_[pos_ - 1].col});
      }
      ExprPtr e = unary();
      return ex::neg(e, {begin, toks_[pos_ - 1].col});
    }
    return power_suffix(primary(), begin);
  }

  ExprPtr power_suffix(ExprPtr base, int begin) {
    if (!accept("^")) return base;
    std::int64_t k = small_int();
    return ex::pow(base, k, {begin, toks_[pos_ - 1].col});
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Num) {
      Rational r = rational_literal();
      return ex::constant(r, {t.col, toks_[pos_ - 1].col});
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "t") {
        ++pos_;
        return ex::var({t.col, t.col});
      }
      if (t.text == "inv") {
        ++pos_;
        expect("(");
        ExprPtr a = expr();
        expect(")");
        return ex::inv(a, false, {t.col, toks_[pos_ - 1].col});
      }
      if (t.text == "an")
        throw SyntaxError("analytic (restricted power series) bodies are not supported", t.col);
      throw SyntaxError("unknown identifier '" + t.text + "'", t.col);
    }
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    fail("expected an expression");
  }

  // ---- guards

  Rational guard_var() {
    expect("(");
    if (!is_ident("t")) fail("expected 't'");
    ++pos_;
    Rational c = 0;
    if (is_sym("-") || is_sym("+")) {
      bool minus = next().text == "-";
      Rational r = rational_literal();
      c = minus ? r : Rational(-r);
    }
    expect(")");
    return c;
  }

  void set_center(Guard& g, bool& have, const Rational& c, int col) {
    if (have && g.center != c) throw SyntaxError("all conditions of a guard must use the same center", col);
    g.center = c;
    have = true;
  }

  static void tighten_min(Guard& g, std::int64_t v) {
    if (!g.ord_min || v > *g.ord_min) g.ord_min = v;
  }
  static void tighten_max(Guard& g, std::int64_t v) {
    if (!g.ord_max || v < *g.ord_max) g.ord_max = v;
  }

  Guard guard() {
    expect("{");
    Guard g;
    if (is_ident("all")) {
      ++pos_;
      expect("}");
      return Guard::everything();
    }
    bool have_center = false;
    if (!is_sym("}")) {
      do condition(g, have_center);
      while (accept(","));
    }
    expect("}");
    return g;
  }

  void condition(Guard& g, bool& have_center) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail("expected a condition");
    if (t.text == "ord") {
      ++pos_;
      set_center(g, have_center, guard_var(), t.col);
      if (is_ident("in")) {
        ++pos_;
        // [r '+'] n 'Z'
        std::int64_t a = small_int();
        std::int64_t r = 0, n = a;
        if (accept("+")) {
          r = a;
          n = small_int();
        }
        if (!is_ident("Z")) fail("expected 'Z'");
        ++pos_;
        if (n <= 0) throw SyntaxError("congruence modulus must be positive", t.col);
        if (g.congruence) throw SyntaxError("duplicate congruence condition", t.col);
        g.congruence = std::make_pair(((r % n) + n) % n, n);
        return;
      }
      std::string op = peek().kind == Tok::Sym ? peek().text : "";
      if (op != ">=" && op != "<=" && op != ">" && op != "<" && op != "=") fail("expected a comparison");
      ++pos_;
      std::int64_t v = small_int();
      if (op == ">=") tighten_min(g, v);
      if (op == ">") tighten_min(g, v + 1);
      if (op == "<=") tighten_max(g, v);
      if (op == "<") tighten_max(g, v - 1);
      if (op == "=") {
        tighten_min(g, v);
        tighten_max(g, v);
      }
      return;
    }
    if (t.text.size() > 2 && t.text.compare(0, 2, "ac") == 0 &&
        std::isdigit(static_cast<unsigned char>(t.text[2]))) {
      ++pos_;
      int level = std::stoi(t.text.substr(2));
      if (level < 1) throw SyntaxError("ac level must be at least 1", t.col);
      if (is_sym("(")) set_center(g, have_center, guard_var(), t.col);
      expect("=");
      Integer a = integer();
      if (!a.fits_ulong_p()) fail("residue out of range");
      if (g.ac) throw SyntaxError("duplicate ac condition", t.col);
      g.ac = std::make_pair(level, static_cast<std::uint64_t>(a.get_ui()));
      return;
    }
    if (t.text == "coset") {
      ++pos_;
      if (is_sym("(")) set_center(g, have_center, guard_var(), t.col);
      Rational lambda = rational_literal();
      if (!is_ident("Q")) fail("expected 'Q'");
      ++pos_;
      expect("[");
      std::int64_t m = small_int();
      expect(",");
      std::int64_t n = small_int();
      expect("]");
      if (m < 1 || n < 1) throw SyntaxError("coset parameters must be positive", t.col);
      g.coset = std::make_pair(lambda, std::make_pair(static_cast<int>(m), static_cast<int>(n)));
      return;
    }
    fail("expected a condition");
  }
};

}  // namespace

PiecewiseFunction parse(const std::string& text) { return Parser(text).function(); }

ExprPtr parse_expr(const std::string& text) { return Parser(text).single_expr(); }

}  // namespace padicprep
