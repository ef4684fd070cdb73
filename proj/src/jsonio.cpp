#include "conehull/jsonio.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace conehull {

namespace {

void expect_keys(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) throw ParseError("unknown key \"" + it.key() + "\" in " + where);
  }
}

std::vector<std::string> string_array(const Json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ParseError(std::string(what) + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string mono_str(const Monomial& m, const std::vector<std::string>& vars) {
  Polynomial p(vars);
  p.set_coeff(m, 1.0);
  return p.to_string();
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("problem file must be a JSON object");
  expect_keys(j, "problem file",
              {"variables", "inequalities", "equalities", "options", "comment"});
  if (!j.contains("variables")) throw ParseError("problem file lacks \"variables\"");

  ProblemFile p;
  p.set.vars = string_array(j.at("variables"), "\"variables\"");
  if (p.set.vars.empty()) throw ParseError("\"variables\" must name at least one variable");
  for (std::size_t i = 0; i < p.set.vars.size(); ++i)
    for (std::size_t l = i + 1; l < p.set.vars.size(); ++l)
      if (p.set.vars[i] == p.set.vars[l])
        throw ParseError("duplicate variable \"" + p.set.vars[i] + "\"");

  if (j.contains("inequalities"))
    for (const auto& s : string_array(j.at("inequalities"), "\"inequalities\""))
      p.set.inequalities.push_back(Polynomial::parse(s, p.set.vars));
  if (j.contains("equalities"))
    for (const auto& s : string_array(j.at("equalities"), "\"equalities\""))
      p.set.equalities.push_back(Polynomial::parse(s, p.set.vars));

  if (j.contains("comment")) {
    if (!j.at("comment").is_string()) throw ParseError("\"comment\" must be a string");
    p.comment = j.at("comment").get<std::string>();
  }

  if (j.contains("options")) {
    const Json& o = j.at("options");
    if (!o.is_object()) throw ParseError("\"options\" must be an object");
    expect_keys(o, "\"options\"", {"order", "tol_eq", "tol_psd", "seed", "max_y", "box"});
    if (o.contains("order")) {
      if (!o.at("order").is_number_integer() || o.at("order").get<int>() < 1)
        throw ParseError("\"order\" must be an integer >= 1");
      p.options.order = o.at("order").get<int>();
    }
    if (o.contains("tol_eq")) {
      if (!o.at("tol_eq").is_number() || !(o.at("tol_eq").get<double>() > 0))
        throw ParseError("\"tol_eq\" must be a positive number");
      p.options.tol_eq = o.at("tol_eq").get<double>();
    }
    if (o.contains("tol_psd")) {
      if (!o.at("tol_psd").is_number() || !(o.at("tol_psd").get<double>() > 0))
        throw ParseError("\"tol_psd\" must be a positive number");
      p.options.tol_psd = o.at("tol_psd").get<double>();
    }
    if (o.contains("seed")) {
      if (!o.at("seed").is_number_unsigned())
        throw ParseError("\"seed\" must be a nonnegative integer");
      p.options.seed = o.at("seed").get<std::uint64_t>();
    }
    if (o.contains("max_y")) {
      if (!o.at("max_y").is_number_unsigned() || o.at("max_y").get<std::size_t>() == 0)
        throw ParseError("\"max_y\" must be a positive integer");
      p.options.max_y = o.at("max_y").get<std::size_t>();
    }
    if (o.contains("box")) {
      const Json& b = o.at("box");
      if (!b.is_array() || b.size() != p.set.vars.size())
        throw ParseError("\"box\" must list one [lo, hi] pair per variable");
      for (const auto& side : b) {
        if (!side.is_array() || side.size() != 2 || !side[0].is_number() || !side[1].is_number())
          throw ParseError("\"box\" must list one [lo, hi] pair per variable");
        double lo = side[0].get<double>(), hi = side[1].get<double>();
        if (!(lo < hi)) throw ParseError("\"box\" bounds must satisfy lo < hi");
        p.options.box.push_back({lo, hi});
      }
    }
  }
  return p;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_problem(text.str());
}

Json problem_json(const ProblemFile& p) {
  Json j;
  j["variables"] = p.set.vars;
  Json ineqs = Json::array(), eqs = Json::array();
  for (const auto& g : p.set.inequalities) ineqs.push_back(g.to_string());
  for (const auto& h : p.set.equalities) eqs.push_back(h.to_string());
  j["inequalities"] = ineqs;
  j["equalities"] = eqs;
  Json o;
  o["order"] = p.options.order;
  o["tol_eq"] = p.options.tol_eq;
  o["tol_psd"] = p.options.tol_psd;
  o["seed"] = p.options.seed;
  o["max_y"] = p.options.max_y;
  if (!p.options.box.empty()) {
    Json b = Json::array();
    for (const auto& side : p.options.box) b.push_back(Json::array({side[0], side[1]}));
    o["box"] = b;
  }
  j["options"] = o;
  if (!p.comment.empty()) j["comment"] = p.comment;
  return j;
}

void save_problem(const ProblemFile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write problem file: " + path);
  out << problem_json(p).dump(2) << "\n";
  if (!out) throw Error("cannot write problem file: " + path);
}

std::uint64_t problem_hash(const ProblemFile& p) {
  const std::string bytes = problem_json(p).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

SolverSettings settings_from(const ProblemOptions& o) {
  SolverSettings s;
  s.eq_tol = o.tol_eq;
  s.psd_tol = o.tol_psd;
  s.seed = o.seed;
  s.max_y = o.max_y;
  return s;
}

Json verdict_json(const MembershipVerdict& v, bool include_witness) {
  Json j;
  j["decision"] = to_string(v.decision);
  j["order"] = v.order;
  j["tol_eq"] = v.tol_eq;
  j["tol_psd"] = v.tol_psd;
  if (include_witness && v.decision == Decision::member && v.witness.size() > 0)
    j["witness_moments"] = vector_json(v.witness);
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

Json support_json(const SupportResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["direction"] = vector_json(r.direction);
  j["order"] = r.order;
  if (r.status == SupportResult::Status::unbounded)
    j["value"] = "inf";
  else if (std::isfinite(r.value))
    j["value"] = r.value;
  else
    j["value"] = nullptr;
  if (r.maximizer_proxy.size() > 0) j["maximizer"] = vector_json(r.maximizer_proxy);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

Json certificate_json(const QModuleCertificate& c) {
  Json j;
  j["outcome"] = to_string(c.outcome);
  j["target"] = c.target.to_string();
  j["order"] = c.order;
  const auto& vars = c.target.vars();
  Json blocks = Json::array();
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    Json b;
    b["generator"] = c.generators[g].to_string();
    Json basis = Json::array();
    if (g < c.gram_bases.size())
      for (const auto& m : c.gram_bases[g]) basis.push_back(mono_str(m, vars));
    b["basis"] = basis;
    Json lower = Json::array();
    if (g < c.gram_blocks.size()) {
      const Eigen::MatrixXd& gm = c.gram_blocks[g];
      for (Eigen::Index r = 0; r < gm.rows(); ++r)
        for (Eigen::Index cidx = 0; cidx <= r; ++cidx) lower.push_back(gm(r, cidx));
    }
    b["gram_lower"] = lower;
    blocks.push_back(b);
  }
  j["blocks"] = blocks;
  Json mults = Json::array();
  for (std::size_t l = 0; l < c.equality_generators.size(); ++l) {
    Json m;
    m["generator"] = c.equality_generators[l].to_string();
    m["multiplier"] = l < c.equality_multipliers.size() ? c.equality_multipliers[l].to_string()
                                                        : std::string("0");
    mults.push_back(m);
  }
  j["equality_multipliers"] = mults;
  if (std::isfinite(c.residual))
    j["residual"] = c.residual;
  else
    j["residual"] = nullptr;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

Json pointedness_json(const PointednessCertificate& c) {
  Json j;
  j["outcome"] = to_string(c.outcome);
  j["ell"] = c.ell.is_zero() ? Json(nullptr) : Json(c.ell.to_string());
  j["margin"] = c.margin;
  j["order"] = c.order;
  j["route"] = c.route;
  j["certificate"] = c.certificate ? certificate_json(*c.certificate) : Json(nullptr);
  j["sign_certificate"] =
      c.sign_certificate ? certificate_json(*c.sign_certificate) : Json(nullptr);
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

Json closedness_json(const ClosednessReport& r) {
  Json j;
  j["structural_obstruction"] = r.structural_obstruction;
  j["noncompact_evidence"] = r.noncompact_evidence;
  j["max_sample_norm"] = r.max_sample_norm;
  j["pointedness"] = r.pointedness ? pointedness_json(*r.pointedness) : Json(nullptr);
  j["recommendation"] = r.recommendation ? Json(r.recommendation->to_string()) : Json(nullptr);
  return j;
}

Json union_verdict_json(const UnionHullVerdict& v) {
  Json j;
  j["decision"] = to_string(v.decision);
  j["order"] = v.order;
  Json w = Json::array();
  for (double x : v.weights) w.push_back(x);
  j["weights"] = w;
  j["over_approximation_possible"] = v.over_approximation_possible;
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

}  // namespace conehull
