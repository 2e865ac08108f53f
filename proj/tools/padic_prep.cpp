#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "padicprep/jacobian.hpp"
#include "padicprep/lipschitz.hpp"
#include "padicprep/prepare.hpp"
#include "padicprep/report.hpp"

using namespace padicprep;

namespace {

struct Config {
  std::string command;
  std::uint64_t p = 3;
  int N = 12;
  int n = 1;
  bool n_given = false;
  std::int64_t v_min = -3;
  std::int64_t v_max = 3;
  std::optional<int> k;
  bool include_zero = false;
  std::vector<std::string> functions;
  std::string file;
  std::string second;
  std::string ball;
  std::string cell;
  std::string domain;
  std::string at;
  std::string image_center;
  std::optional<std::int64_t> eps_exp;
  std::string eps;
  std::optional<std::int64_t> target;
  std::string report;
  bool uniqueness = false;
  int jobs = 1;
  bool quiet = false;

  Window window() const { return Window{v_min, v_max, k ? *k : n + 3, include_zero}; }
};

struct Outcome {
  Json result;
  int code = 0;
  std::string summary;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PiecewiseFunction load_function_text(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw PreconditionError(std::string("function file is not valid JSON: ") + e.what());
    }
    return function_from_json(j);
  }
  return parse(text);
}

std::vector<PiecewiseFunction> load_functions(const Config& c) {
  std::vector<PiecewiseFunction> out;
  for (const auto& s : c.functions) out.push_back(parse(s));
  if (!c.file.empty()) out.push_back(load_function_text(read_file(c.file)));
  if (out.empty()) throw PreconditionError("no function given (use -f or --file)");
  return out;
}

PiecewiseFunction one_function(const Config& c) {
  auto fs = load_functions(c);
  if (fs.size() != 1) throw PreconditionError("this command takes exactly one function");
  return fs.front();
}

Ball parse_ball(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) throw PreconditionError("--ball expects center:radius, got \"" + s + "\"");
  Ball B;
  B.center = parse_rational(s.substr(0, colon));
  try {
    B.radius = std::stoll(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw PreconditionError("bad ball radius in \"" + s + "\"");
  }
  return B;
}

Guard parse_guard(const std::string& s) { return parse("0 on " + s).pieces.front().guard; }

Cell single_cell(const std::string& s, std::uint64_t p) {
  auto cells = guard_cells(parse_guard(s), p);
  if (cells.size() != 1) throw PreconditionError("--cell must describe exactly one cell; \"" + s + "\" gives " +
                                                 std::to_string(cells.size()));
  return cells.front();
}

Ball require_ball(const Config& c) {
  if (c.ball.empty()) throw PreconditionError("--ball is required");
  return parse_ball(c.ball);
}

Json config_json(const Config& c, const std::vector<PiecewiseFunction>& fs) {
  Json j;
  j["p"] = c.p;
  j["N"] = c.N;
  j["n"] = c.n;
  j["window"] = to_json(c.window());
  Json fns = Json::array();
  for (const auto& f : fs) fns.push_back(Json{{"text", print(f)}, {"ast", function_to_json(f)}});
  j["functions"] = fns;
  if (!c.file.empty()) j["file"] = c.file;
  if (!c.second.empty()) j["g"] = c.second;
  if (!c.ball.empty()) j["ball"] = c.ball;
  if (!c.cell.empty()) j["cell"] = c.cell;
  if (!c.domain.empty()) j["domain"] = c.domain;
  if (!c.at.empty()) j["at"] = c.at;
  if (c.eps_exp) j["eps_exp"] = *c.eps_exp;
  if (!c.eps.empty()) j["eps"] = c.eps;
  if (c.target) j["target"] = *c.target;
  j["jobs"] = c.jobs;
  return j;
}

Outcome property_outcome(const PropertyReport& r, Json result) {
  Outcome o;
  o.result = std::move(result);
  o.code = r.pass ? 0 : 1;
  o.summary = r.property + ": " + (r.pass ? "pass" : "FAIL");
  if (r.counterexample)
    o.summary += " at (" + to_string(r.counterexample->x) + ", " + to_string(r.counterexample->y) + ") [" +
                 r.counterexample->condition + "] " + r.counterexample->lhs + " vs " + r.counterexample->rhs;
  return o;
}

Outcome solver_outcome(const SolverResult& r, const FieldContext& ctx, const std::string& name) {
  Outcome o;
  o.result = to_json(r, ctx);
  // a failed hypothesis is a precondition of the solver
  o.code = r.ok ? 0 : 2;
  o.summary = name + ": ";
  if (r.ok)
    o.summary += to_string(r.exact ? *r.exact : r.value) + (r.exact ? " (exact)" : "") + " after " +
                 std::to_string(r.iterations) + " iterations";
  else
    o.summary += "hypothesis failed: " + r.failure;
  return o;
}

Outcome run_eval(const Config& c, const FieldContext& ctx) {
  if (c.at.empty()) throw PreconditionError("--at is required");
  PiecewiseFunction f = one_function(c);
  Rational t = parse_rational(c.at);
  Rational v = eval_exact(f, t, ctx.p);
  Json j;
  j["t"] = to_json(t);
  j["value"] = to_json(v);
  j["digits"] = from_rational(v, ctx).digits();
  j["ord"] = v == 0 ? Json(nullptr) : Json(ord_p(v, ctx.p));
  j["rv"] = to_json(rv_exact(v, ctx.p, c.n));
  try {
    Rational d = eval_exact(differentiate(f), t, ctx.p);
    j["derivative"] = to_json(d);
    j["derivative_rv"] = to_json(rv_exact(d, ctx.p, c.n));
  } catch (const PoleError&) {
    j["derivative"] = nullptr;
  }
  return {j, 0, "f(" + to_string(t) + ") = " + to_string(v)};
}

Outcome run_jacobian(const Config& c, const FieldContext& ctx) {
  PiecewiseFunction f = one_function(c);
  Ball B = require_ball(c);
  PropertyReport r = c.n_given ? check_n_jacobian(f, B, c.n, c.window(), ctx) : check_jacobian(f, B, c.window(), ctx);
  Json j = to_json(r, ctx);
  j["ball"] = to_json(B);
  return property_outcome(r, j);
}

Outcome run_compatible(const Config& c, const FieldContext& ctx) {
  if (c.cell.empty()) throw PreconditionError("--cell is required");
  Cell A = single_cell(c.cell, ctx.p);
  std::optional<Rational> center;
  if (!c.image_center.empty()) center = parse_rational(c.image_center);
  if (!c.second.empty()) {
    auto r = check_n_equicompatible(one_function(c), parse(c.second), A, c.n, c.window(), ctx, center);
    return property_outcome(r.report, to_json(r, ctx));
  }
  auto r = check_n_compatible(one_function(c), A, c.n, c.window(), ctx, center);
  return property_outcome(r.report, to_json(r, ctx));
}

std::int64_t target_of(const Config& c) { return c.target ? *c.target : default_target(c.window(), c.n); }

Outcome run_fixed_point(const Config& c, const FieldContext& ctx) {
  auto r = banach_fixed_point(one_function(c), require_ball(c), target_of(c), c.window(), ctx);
  return solver_outcome(r, ctx, "fixed-point");
}

Outcome run_equal_point(const Config& c, const FieldContext& ctx) {
  if (c.second.empty()) throw PreconditionError("-g is required");
  auto r = solve_equal_point(one_function(c), parse(c.second), require_ball(c), target_of(c), c.window(), ctx);
  return solver_outcome(r, ctx, "equal-point");
}

Outcome run_equal_rv(const Config& c, const FieldContext& ctx) {
  if (c.second.empty()) throw PreconditionError("-g is required");
  auto r = solve_equal_rv_point(one_function(c), parse(c.second), require_ball(c), c.n, target_of(c), c.window(), ctx);
  return solver_outcome(r, ctx, "equal-rv");
}

Guard domain_of(const Config& c) { return c.domain.empty() ? Guard::everything() : parse_guard(c.domain); }

Outcome run_prepare(const Config& c, const FieldContext& ctx) {
  auto fs = load_functions(c);
  Guard dom = domain_of(c);
  Partition P = prepare(fs, c.n, dom, c.window(), ctx);
  PropertyReport tiling = check_tiling(P, dom, c.window(), ctx.p);
  Json j = to_json(P, ctx);
  j["tiling"] = to_json(tiling, ctx);
  bool ok = tiling.pass && j["verdict"] == "pass";
  if (c.uniqueness) {
    const WindowIndex idx(c.window(), ctx.p);
    Json u = Json::array();
    for (std::size_t i = 0; i < P.cells.size(); ++i) {
      if (!P.cells[i].cell.unbounded()) continue;
      for (std::size_t k = 0; k < fs.size(); ++k) {
        auto r = uniqueness_check(P.cells[i], fs[k], c.n, idx, ctx, k);
        Json e = to_json(r, ctx);
        e["cell_index"] = i;
        e["function_index"] = k;
        u.push_back(e);
        ok = ok && r.report.pass;
      }
    }
    j["uniqueness"] = u;
  }
  return {j, ok ? 0 : 1,
          std::string("prepare: ") + (ok ? "pass" : "FAIL") + " (" + std::to_string(P.cells.size()) + " cells)"};
}

Outcome run_classical(const Config& c, const FieldContext& ctx) {
  auto fs = load_functions(c);
  ClassicalPartition P = classical_decomposition(fs, c.n, domain_of(c), c.window(), ctx);
  Outcome o = property_outcome(P.report, to_json(P, ctx));
  o.summary = "classical: " + o.summary + " (" + std::to_string(P.cells.size()) + " cells)";
  return o;
}

LipschitzBudget budget_of(const Config& c) {
  if (c.eps_exp && !c.eps.empty()) throw PreconditionError("give either --eps-exp or --eps, not both");
  if (c.eps_exp) return {*c.eps_exp};
  if (!c.eps.empty()) return LipschitzBudget::floor_of(parse_rational(c.eps), c.p);
  return {0};
}

Outcome run_lipschitz(const Config& c, const FieldContext& ctx) {
  PiecewiseFunction f = one_function(c);
  Guard dom = domain_of(c);
  LipschitzBudget b = budget_of(c);
  LipschitzDecomposition d = decompose_lipschitz(f, dom, b, c.n, c.window(), ctx, c.jobs);
  Json j = to_json(d, ctx);
  PropertyReport merged = verify_global_lipschitz(f, lipschitz_domain(f, dom, ctx.p), b, c.window(), ctx, c.jobs);
  j["undivided"] = to_json(merged, ctx);
  bool ok = j["verdict"] == "pass";
  return {j, ok ? 0 : 1,
          std::string("lipschitz: ") + (ok ? "pass" : "FAIL") + " with e = " + std::to_string(b.exponent) + ", " +
              std::to_string(d.parts.size()) + " parts; undivided domain " + (merged.pass ? "passes" : "fails")};
}

// Re-checks a partition report written by `prepare`.
Outcome run_verify(const Config& c) {
  if (c.report.empty()) throw PreconditionError("--report is required");
  Json rep;
  try {
    rep = Json::parse(read_file(c.report));
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("report is not valid JSON: ") + e.what());
  }
  if (rep.value("command", "") != "prepare") throw PreconditionError("--report must be a prepare report");
  std::vector<PiecewiseFunction> fs;
  for (const auto& f : rep.at("config").at("functions")) fs.push_back(function_from_json(f.at("ast")));
  const Json& cfg = rep.at("config");
  const Json& w = cfg.at("window");
  Window W{w.at("v_min").get<std::int64_t>(), w.at("v_max").get<std::int64_t>(), w.at("k").get<int>(),
           w.at("include_zero").get<bool>()};
  const int n = cfg.at("n").get<int>();
  FieldContext rctx = FieldContext::make(cfg.at("p").get<std::uint64_t>(), cfg.at("N").get<int>());
  Partition P;
  P.n = n;
  for (const auto& jc : rep.at("result").at("cells")) {
    const Json& cj = jc.at("cell");
    PreparedCell pc;
    Rational center = rational_from_json(cj.at("center"));
    if (cj.at("kind") == "point") {
      pc.cell = Cell::point(center);
    } else {
      auto opt = [&](const char* k) -> std::optional<std::int64_t> {
        return cj.at(k).is_null() ? std::nullopt : std::optional<std::int64_t>(cj.at(k).get<std::int64_t>());
      };
      pc.cell = Cell::annulus(center, rational_from_json(cj.at("lambda")), cj.at("m").get<int>(),
                              cj.at("n").get<int>(), opt("ord_min"), opt("ord_max"), rctx.p);
    }
    for (const auto& fj : jc.at("functions")) {
      CellApproximation ap;
      ap.d = rational_from_json(fj.at("d"));
      const Json& mj = fj.at("m");
      ap.m = FractionalMonomial::integral(rational_from_json(mj.at("center")),
                                          rational_from_json(mj.at("coefficient")), mj.at("a").get<std::int64_t>());
      pc.fns.push_back(ap);
    }
    P.cells.push_back(pc);
  }
  Guard dom = cfg.contains("domain") ? parse_guard(cfg.at("domain").get<std::string>()) : Guard::everything();
  PropertyReport tiling = check_tiling(P, dom, W, rctx.p);
  const WindowIndex idx(W, rctx.p);
  PropertyReport all;
  all.property = "partition-certificate";
  all.n = n;
  all.window = W;
  for (std::size_t i = 0; i < P.cells.size() && all.pass; ++i) {
    const PreparedCell& pc = P.cells[i];
    std::vector<Rational> sample = certification_sample(pc.cell, idx);
    if (pc.cell.is_point()) sample.clear();
    for (std::size_t k = 0; k < fs.size() && all.pass; ++k) {
      const CellApproximation& ap = pc.fns.at(k);
      auto r = check_n_equicompatible_on(fs[k], monomial_function(ap.d, ap.m), pc.cell, n, sample, rctx, ap.d);
      all.checked_points += r.report.checked_points;
      all.checked_pairs += r.report.checked_pairs;
      if (!r.report.pass) {
        Counterexample cx = *r.report.counterexample;
        cx.condition = "cell " + std::to_string(i) + ": " + cx.condition;
        all.fail(cx);
      }
    }
  }
  Json j;
  j["cells"] = P.cells.size();
  j["tiling"] = to_json(tiling, rctx);
  j["certificate"] = to_json(all, rctx);
  bool ok = tiling.pass && all.pass;
  Outcome o = property_outcome(tiling.pass ? all : tiling, j);
  o.code = ok ? 0 : 1;
  o.summary = "verify: " + std::string(ok ? "pass" : "FAIL") + " (" + std::to_string(P.cells.size()) + " cells)";
  return o;
}

Outcome dispatch(const Config& c, const FieldContext& ctx) {
  if (c.command == "eval") return run_eval(c, ctx);
  if (c.command == "jacobian") return run_jacobian(c, ctx);
  if (c.command == "compatible") return run_compatible(c, ctx);
  if (c.command == "fixed-point") return run_fixed_point(c, ctx);
  if (c.command == "equal-point") return run_equal_point(c, ctx);
  if (c.command == "equal-rv") return run_equal_rv(c, ctx);
  if (c.command == "prepare") return run_prepare(c, ctx);
  if (c.command == "classical") return run_classical(c, ctx);
  if (c.command == "lipschitz") return run_lipschitz(c, ctx);
  if (c.command == "verify") return run_verify(c);
  throw PreconditionError("unknown command " + c.command);
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("-p", c.p, "prime (default 3)");
  sub->add_option("-N", c.N, "p-adic precision in digits (default 12)");
  sub->add_option("--n", c.n, "level n (default 1)")->each([&c](const std::string&) { c.n_given = true; });
  sub->add_option("--vmin", c.v_min, "least window valuation (default -3)");
  sub->add_option("--vmax", c.v_max, "largest window valuation (default 3)");
  sub->add_option("--k", c.k, "window unit digits (default n+3)");
  sub->add_flag("--zero", c.include_zero, "add 0 to the window");
  sub->add_option("-f,--function", c.functions, "function text (repeatable for prepare/classical)");
  sub->add_option("--file", c.file, "function file: text grammar or JSON AST");
  sub->add_option("--jobs", c.jobs, "worker threads (fallback: PADIC_PREP_JOBS)");
  sub->add_flag("--quiet", c.quiet, "no summary on stderr");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-adic preparation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolkitVersion);
  Config c;
  if (const char* env = std::getenv("PADIC_PREP_JOBS")) {
    try {
      c.jobs = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      c.jobs = 1;
    }
  }

  auto* eval = app.add_subcommand("eval", "evaluate f at a rational point");
  auto* jac = app.add_subcommand("jacobian", "check the (n-)Jacobian property on a ball");
  auto* comp = app.add_subcommand("compatible", "check n-compatibility (or equicompatibility with -g) on a cell");
  auto* fix = app.add_subcommand("fixed-point", "Banach fixed point on a ball");
  auto* eqp = app.add_subcommand("equal-point", "solve f(x) = g(x) on a ball");
  auto* eqrv = app.add_subcommand("equal-rv", "solve f(x) = g(x) with rv_n hypotheses");
  auto* prep = app.add_subcommand("prepare", "prepare functions into cells with center and monomial");
  auto* cls = app.add_subcommand("classical", "rv_n-matching monomials per cell");
  auto* lip = app.add_subcommand("lipschitz", "piecewise Lipschitz decomposition with the same constant");
  auto* ver = app.add_subcommand("verify", "re-check a prepare report");
  for (auto* s : {eval, jac, comp, fix, eqp, eqrv, prep, cls, lip, ver}) add_common(s, c);
  eval->add_option("--at", c.at, "rational point");
  jac->add_option("--ball", c.ball, "center:radius");
  comp->add_option("--cell", c.cell, "cell as a guard, e.g. {ord(t)>=0, ac1=1}");
  comp->add_option("-g", c.second, "second function for equicompatibility");
  comp->add_option("--image-center", c.image_center, "center of the image cell");
  for (auto* s : {fix, eqp, eqrv}) {
    s->add_option("--ball", c.ball, "center:radius");
    s->add_option("--target", c.target, "digits of accuracy (default k + n)");
  }
  eqp->add_option("-g", c.second, "second function");
  eqrv->add_option("-g", c.second, "second function");
  for (auto* s : {prep, cls, lip}) s->add_option("--domain", c.domain, "domain guard (default {all})");
  prep->add_flag("--uniqueness", c.uniqueness, "run the coefficient panel on unbounded cells");
  lip->add_option("--eps-exp", c.eps_exp, "budget exponent e, epsilon = q^e");
  lip->add_option("--eps", c.eps, "budget as a positive rational, floored to a power of q");
  ver->add_option("--report", c.report, "prepare report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (auto* s : app.get_subcommands()) c.command = s->get_name();
  c.jobs = std::max(1, c.jobs);

  Json out;
  out["schema"] = kSchemaId;
  out["version"] = kToolkitVersion;
  out["command"] = c.command;
  int code = 0;
  std::string summary;
  try {
    FieldContext ctx = FieldContext::make(c.p, c.N);
    if (c.n < 0 || (c.n == 0 && c.command != "jacobian")) throw PreconditionError("level n must be at least 1");
    if (c.k && *c.k < 1) throw PreconditionError("window k must be positive");
    if (c.command == "verify")
      out["config"] = Json{{"report", c.report}};
    else
      out["config"] = config_json(c, load_functions(c));
    Outcome o = dispatch(c, ctx);
    out["result"] = o.result;
    code = o.code;
    summary = o.summary;
  } catch (const SyntaxError& e) {
    out["error"] = Json{{"kind", "syntax"}, {"message", e.what()}, {"column", e.column}};
    code = 2;
    summary = std::string("syntax error: ") + e.what();
  } catch (const PreconditionError& e) {
    out["error"] = Json{{"kind", "precondition"}, {"message", e.what()}};
    code = 2;
    summary = std::string("precondition: ") + e.what();
  } catch (const PoleError& e) {
    out["error"] = Json{{"kind", "pole"}, {"message", e.what()}};
    code = 2;
    summary = std::string("pole: ") + e.what();
  } catch (const Error& e) {
    out["error"] = Json{{"kind", "failure"}, {"message", e.what()}};
    code = 1;
    summary = std::string("failure: ") + e.what();
  }
  out["exit_code"] = code;
  std::cout << out.dump(2) << "\n";
  if (!c.quiet) std::cerr << summary << "\n";
  return code;
}
