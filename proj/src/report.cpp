#include "padicprep/report.hpp"

namespace padicprep {

namespace {

Json opt_int(const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

Json opt_rat(const std::optional<Rational>& v) { return v ? to_json(*v) : Json(nullptr); }

Json point_json(const Rational& x, const FieldContext& ctx) {
  Json j;
  j["value"] = to_json(x);
  try {
    j["digits"] = from_rational(x, ctx).digits();
  } catch (const Error&) {
    j["digits"] = nullptr;
  }
  return j;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Neg: return "neg";
    case Op::Inv: return "inv";
    case Op::Pow: return "pow";
  }
  return "?";
}

}  // namespace

Json to_json(const Rational& x) { return to_string(x); }

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(static_cast<long>(j.get<std::int64_t>()));
  if (!j.is_string()) throw PreconditionError("expected a rational as a \"num/den\" string");
  return parse_rational(j.get<std::string>());
}

Json to_json(const Window& W) {
  return Json{{"v_min", W.v_min}, {"v_max", W.v_max}, {"k", W.unit_level}, {"include_zero", W.include_zero}};
}

Json to_json(const Ball& B) {
  return Json{{"center", to_json(B.center)}, {"radius", B.radius}};
}

Json to_json(const Cell& A, std::uint64_t p) {
  Json j;
  j["kind"] = A.is_point() ? "point" : "cell";
  j["center"] = to_json(A.center);
  j["lambda"] = to_json(A.lambda);
  j["m"] = A.m;
  j["n"] = A.n;
  j["ord_min"] = opt_int(A.ord_min(p));
  j["ord_max"] = opt_int(A.ord_max(p));
  j["alpha"] = opt_rat(A.alpha);
  j["beta"] = opt_rat(A.beta);
  j["base"] = nullptr;
  return j;
}

Json to_json(const RVElement& r) {
  if (r.zero) return Json{{"zero", true}, {"level", r.level}};
  return Json{{"zero", false}, {"valuation", r.valuation}, {"ac", r.ac}, {"level", r.level}};
}

Json to_json(const FractionalMonomial& m) {
  Json j{{"center", to_json(m.center)}, {"coefficient", to_json(m.coefficient)}, {"a", m.a}, {"b", m.b}};
  j["branch"] = m.b == 1 ? Json(nullptr) : to_json(m.branch);
  return j;
}

Json to_json(const Guard& g) {
  if (g.all) return Json{{"all", true}};
  Json j{{"all", false}, {"center", to_json(g.center)}};
  j["ord_min"] = opt_int(g.ord_min);
  j["ord_max"] = opt_int(g.ord_max);
  j["congruence"] = g.congruence ? Json{{"residue", g.congruence->first}, {"modulus", g.congruence->second}}
                                 : Json(nullptr);
  j["ac"] = g.ac ? Json{{"level", g.ac->first}, {"residue", g.ac->second}} : Json(nullptr);
  j["coset"] = g.coset ? Json{{"lambda", to_json(g.coset->first)},
                              {"m", g.coset->second.first},
                              {"n", g.coset->second.second}}
                       : Json(nullptr);
  j["text"] = print(g);
  return j;
}

Json to_json(const Counterexample& c, const FieldContext& ctx) {
  return Json{{"x", point_json(c.x, ctx)},
              {"y", point_json(c.y, ctx)},
              {"lhs", c.lhs},
              {"rhs", c.rhs},
              {"condition", c.condition}};
}

Json to_json(const PropertyReport& r, const FieldContext& ctx) {
  Json j;
  j["property"] = r.property;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["n"] = r.n;
  j["checked_points"] = r.checked_points;
  j["checked_pairs"] = r.checked_pairs;
  j["window"] = to_json(r.window);
  j["counterexample"] = r.counterexample ? to_json(*r.counterexample, ctx) : Json(nullptr);
  return j;
}

Json to_json(const ImageCell& I, std::uint64_t p) {
  Json j;
  j["point"] = I.point;
  j["center"] = to_json(I.center);
  if (!I.point) {
    j["depth"] = I.depth;
    j["residue"] = I.residue;
    j["modulus"] = I.modulus;
    j["valuations"] = I.valuations;
    j["cell"] = to_json(I.as_cell(p), p);
  }
  j["sampled_points"] = I.sampled_points;
  return j;
}

Json to_json(const CompatibilityReport& r, const FieldContext& ctx) {
  Json j = to_json(r.report, ctx);
  j["balls"] = r.balls;
  j["image"] = r.image ? to_json(*r.image, ctx.p) : Json(nullptr);
  return j;
}

Json to_json(const EquicompatibilityReport& r, const FieldContext& ctx) {
  Json j = to_json(r.report, ctx);
  j["f"] = to_json(r.f, ctx);
  j["g"] = to_json(r.g, ctx);
  return j;
}

Json to_json(const SolverResult& r, const FieldContext& ctx) {
  Json j;
  j["verdict"] = r.ok ? "pass" : "fail";
  j["value"] = point_json(r.value, ctx);
  j["exact"] = opt_rat(r.exact);
  j["iterations"] = r.iterations;
  j["target"] = r.target;
  j["achieved"] = r.ok ? (r.achieved ? Json(*r.achieved) : Json("exact")) : Json(nullptr);
  j["failure"] = r.failure.empty() ? Json(nullptr) : Json(r.failure);
  j["witness"] = r.witness ? to_json(*r.witness, ctx) : Json(nullptr);
  return j;
}

Json to_json(const Partition& P, const FieldContext& ctx) {
  Json cells = Json::array();
  std::uint64_t points = 0, pairs = 0;
  bool all_verified = true;
  for (const auto& pc : P.cells) {
    Json c;
    c["cell"] = to_json(pc.cell, ctx.p);
    c["ell"] = pc.ell;
    c["thin"] = pc.thin;
    c["provenance"] = pc.provenance;
    Json fns = Json::array();
    for (const auto& ap : pc.fns) {
      fns.push_back(Json{{"d", to_json(ap.d)},
                         {"m", to_json(ap.m)},
                         {"ell_prime", ap.ell_prime},
                         {"verified", ap.verified},
                         {"sample", ap.sample},
                         {"checked_points", ap.checked_points},
                         {"checked_pairs", ap.checked_pairs}});
      points += ap.checked_points;
      pairs += ap.checked_pairs;
      all_verified = all_verified && ap.verified;
    }
    c["functions"] = fns;
    cells.push_back(c);
  }
  Json j;
  j["n"] = P.n;
  j["cell_count"] = P.cells.size();
  j["verdict"] = all_verified ? "pass" : "fail";
  j["checked_points"] = points;
  j["checked_pairs"] = pairs;
  j["cells"] = cells;
  j["log"] = P.log;
  return j;
}

Json to_json(const ClassicalPartition& P, const FieldContext& ctx) {
  Json cells = Json::array();
  for (const auto& cc : P.cells) {
    Json ms = Json::array();
    for (std::size_t i = 0; i < cc.monomials.size(); ++i)
      ms.push_back(Json{{"monomial", to_json(cc.monomials[i])}, {"rule", cc.rule[i]}});
    cells.push_back(Json{{"cell", to_json(cc.cell, ctx.p)}, {"provenance", cc.provenance}, {"functions", ms}});
  }
  Json j;
  j["cell_count"] = P.cells.size();
  j["check"] = to_json(P.report, ctx);
  j["cells"] = cells;
  return j;
}

Json to_json(const UniquenessReport& r, const FieldContext& ctx) {
  Json j = to_json(r.report, ctx);
  j["perturbations"] = r.perturbations;
  j["rejected"] = r.rejected;
  return j;
}

Json to_json(const LipschitzDecomposition& d, const FieldContext& ctx) {
  Json parts = Json::array();
  bool pass = true;
  for (const auto& part : d.parts) {
    Json cells = Json::array();
    for (const auto& A : part.cells) cells.push_back(to_json(A, ctx.p));
    Json j;
    j["origin"] = part.origin;
    j["piece"] = part.piece ? Json(*part.piece) : Json(nullptr);
    j["certification"] = part.beyond_window ? "window+preparation" : "window";
    j["cells"] = cells;
    j["global"] = to_json(part.report, ctx);
    parts.push_back(j);
    pass = pass && part.report.pass;
  }
  Json j;
  j["budget"] = Json{{"exponent", d.budget.exponent}, {"epsilon", to_json(d.budget.epsilon(ctx.p))}};
  j["n"] = d.n;
  j["verdict"] = pass ? "pass" : "fail";
  j["local"] = to_json(d.local, ctx);
  j["prepared_cells"] = d.prepared_cells;
  j["excised"] = d.excised;
  j["part_count"] = d.parts.size();
  j["parts"] = parts;
  j["log"] = d.log;
  return j;
}

// ---------------------------------------------------------------- AST

Json expr_to_json(const ExprPtr& e) {
  Json j;
  j["op"] = op_name(e->op);
  switch (e->op) {
    case Op::Const: j["value"] = to_json(e->value); break;
    case Op::Var: break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      j["lhs"] = expr_to_json(e->lhs);
      j["rhs"] = expr_to_json(e->rhs);
      break;
    case Op::Neg: j["arg"] = expr_to_json(e->lhs); break;
    case Op::Inv:
      j["arg"] = expr_to_json(e->lhs);
      if (e->pole_on_zero) j["pole_on_zero"] = true;
      break;
    case Op::Pow:
      j["base"] = expr_to_json(e->lhs);
      j["exponent"] = e->exponent;
      break;
  }
  return j;
}

ExprPtr expr_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("op")) throw PreconditionError("expression node needs an \"op\" field");
  const std::string op = j.at("op").get<std::string>();
  auto sub = [&](const char* key) {
    if (!j.contains(key)) throw PreconditionError("\"" + op + "\" node needs \"" + key + "\"");
    return expr_from_json(j.at(key));
  };
  if (op == "const") return ex::constant(rational_from_json(j.at("value")));
  if (op == "var") return ex::var();
  if (op == "add") return ex::add(sub("lhs"), sub("rhs"));
  if (op == "sub") return ex::sub(sub("lhs"), sub("rhs"));
  if (op == "mul") return ex::mul(sub("lhs"), sub("rhs"));
  if (op == "neg") return ex::neg(sub("arg"));
  if (op == "inv") return ex::inv(sub("arg"), j.value("pole_on_zero", false));
  if (op == "pow") return ex::pow(sub("base"), j.at("exponent").get<std::int64_t>());
  throw PreconditionError("unknown expression op \"" + op + "\"");
}

Guard guard_from_json(const Json& j) {
  if (j.is_string()) return parse("0 on " + j.get<std::string>()).pieces.front().guard;
  if (j.value("all", false)) return Guard::everything();
  Guard g;
  if (j.contains("center")) g.center = rational_from_json(j.at("center"));
  if (j.contains("ord_min") && !j.at("ord_min").is_null()) g.ord_min = j.at("ord_min").get<std::int64_t>();
  if (j.contains("ord_max") && !j.at("ord_max").is_null()) g.ord_max = j.at("ord_max").get<std::int64_t>();
  if (j.contains("congruence") && !j.at("congruence").is_null()) {
    const Json& c = j.at("congruence");
    std::int64_t n = c.at("modulus").get<std::int64_t>();
    if (n <= 0) throw PreconditionError("congruence modulus must be positive");
    std::int64_t r = c.at("residue").get<std::int64_t>();
    g.congruence = std::make_pair(((r % n) + n) % n, n);
  }
  if (j.contains("ac") && !j.at("ac").is_null()) {
    const Json& a = j.at("ac");
    g.ac = std::make_pair(a.at("level").get<int>(), a.at("residue").get<std::uint64_t>());
  }
  if (j.contains("coset") && !j.at("coset").is_null()) {
    const Json& c = j.at("coset");
    g.coset = std::make_pair(rational_from_json(c.at("lambda")), std::make_pair(c.at("m").get<int>(), c.at("n").get<int>()));
  }
  return g;
}

Json function_to_json(const PiecewiseFunction& f) {
  Json pieces = Json::array();
  for (const auto& piece : f.pieces)
    pieces.push_back(Json{{"guard", to_json(piece.guard)}, {"body", expr_to_json(piece.body)}});
  return Json{{"pieces", pieces}};
}

PiecewiseFunction function_from_json(const Json& j) {
  PiecewiseFunction f;
  try {
    if (!j.contains("pieces") || !j.at("pieces").is_array() || j.at("pieces").empty())
      throw PreconditionError("function JSON needs a non-empty \"pieces\" array");
    for (const auto& piece : j.at("pieces")) {
      Guard g = piece.contains("guard") ? guard_from_json(piece.at("guard")) : Guard::everything();
      f.pieces.push_back({g, expr_from_json(piece.at("body"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("malformed function JSON: ") + e.what());
  }
  return f;
}

}  // namespace padicprep
