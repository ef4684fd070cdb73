#include "conehull/relax.hpp"

#include <algorithm>
#include <cmath>

namespace conehull {

namespace {

constexpr double kPi = 3.14159265358979323846;

Polynomial norm_squared_minus_one(const std::vector<std::string>& vars) {
  Polynomial p = Polynomial::constant(std::vector<std::string>(vars), -1.0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Polynomial v = Polynomial::variable(std::vector<std::string>(vars), i);
    p = p + v * v;
  }
  return p;
}

int half_degree_up(const Polynomial& p) { return (p.total_degree() + 1) / 2; }

// substitute x -> lam x and renormalize by the largest coefficient; feasibility
// of moment problems is invariant under this change of variables
Polynomial rescale_vars(const Polynomial& g, const std::vector<std::string>& vars, double lam) {
  Polynomial h = Polynomial::constant(std::vector<std::string>(vars), 0.0);
  double m = 0.0;
  for (const auto& [mono, coef] : g.terms()) {
    double c = coef * std::pow(lam, static_cast<double>(mono.degree()));
    h.set_coeff(mono, c);
    m = std::max(m, std::abs(c));
  }
  return m > 0.0 ? h.scaled(1.0 / m) : h;
}

SemialgebraicSet rescale_vars(const SemialgebraicSet& s, double lam) {
  SemialgebraicSet out;
  out.vars = s.vars;
  for (const auto& g : s.inequalities) out.inequalities.push_back(rescale_vars(g, s.vars, lam));
  for (const auto& e : s.equalities) out.equalities.push_back(rescale_vars(e, s.vars, lam));
  return out;
}

// objective value whose reachability is treated as unboundedness
constexpr double kProbeLevel = 1e6;

// moment matrix, localizing blocks for inequality generators, zero blocks for
// equality generators; generators too deep for the order are dropped
void add_cone_blocks(ConicProblem& prob, const MomentLayout& layout,
                     const HomogenizedSystem& h) {
  prob.psd_blocks.push_back(moment_template(layout));
  for (const auto& g : h.generators)
    if (localizing_order(layout, g) >= 0) prob.psd_blocks.push_back(localizing_template(layout, g));
  for (const auto& e : h.equality_generators)
    if (localizing_order(layout, e) >= 0) prob.zero_blocks.push_back(localizing_template(layout, e));
}

MembershipVerdict verdict_from_solution(const ConicProblem& prob, const Solution& sol, int k,
                                        const SolverSettings& s) {
  MembershipVerdict v;
  v.order = k;
  v.tol_eq = s.eq_tol;
  v.tol_psd = s.psd_tol;
  v.detail = sol.message;
  switch (sol.status) {
    case SolveStatus::optimal:
    case SolveStatus::inaccurate:
      if (check_solution(prob, sol.y, s).pass) {
        v.decision = Decision::member;
        v.witness = sol.y;
      } else {
        v.decision = Decision::undetermined;
        v.detail = "candidate point failed revalidation (" + sol.message + ")";
      }
      break;
    case SolveStatus::infeasible:
      // solve() only reports this with a checker-verified Farkas combination
      v.decision = Decision::not_member;
      break;
    default:
      v.decision = Decision::undetermined;
      break;
  }
  return v;
}

}  // namespace

std::string to_string(Decision d) {
  switch (d) {
    case Decision::member: return "member";
    case Decision::not_member: return "not_member";
    default: return "undetermined";
  }
}

std::string to_string(SupportResult::Status s) {
  switch (s) {
    case SupportResult::Status::ok: return "ok";
    case SupportResult::Status::unbounded: return "unbounded";
    default: return "undetermined";
  }
}

HomogenizedSystem homogenize_system(const SemialgebraicSet& s) {
  if (s.vars.empty()) throw Error("cannot homogenize a set without variables");
  HomogenizedSystem h;
  h.base = s;
  h.hom_var = "x0";
  // avoid capturing an existing variable name
  while (std::find(s.vars.begin(), s.vars.end(), h.hom_var) != s.vars.end())
    h.hom_var = "_" + h.hom_var;
  h.vars.push_back(h.hom_var);
  h.vars.insert(h.vars.end(), s.vars.begin(), s.vars.end());

  for (const auto& g : s.inequalities) h.generators.push_back(g.homogenize(h.hom_var));
  h.generators.push_back(Polynomial::variable(std::vector<std::string>(h.vars), 0));
  h.equality_generators.push_back(norm_squared_minus_one(h.vars));
  for (const auto& e : s.equalities) h.equality_generators.push_back(e.homogenize(h.hom_var));

  for (const auto& g : h.generators) h.generator_orders.push_back(half_degree_up(g));
  return h;
}

ConicProblem build_membership_problem(const HomogenizedSystem& h, int k,
                                      const Eigen::VectorXd& x) {
  if (k < 1) throw Error("relaxation order must be at least 1");
  const std::size_t n = h.base.vars.size();
  if (static_cast<std::size_t>(x.size()) != n)
    throw Error("point dimension does not match the variable count");
  MomentLayout layout = make_layout(h.nvars(), k);
  ConicProblem prob;
  prob.num_y = layout.dim();
  LinearFunctional row0;
  row0.add(layout.index_of(Monomial::var(h.nvars(), 0)), 1.0);
  prob.equalities.emplace_back(row0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    LinearFunctional row;
    row.add(layout.index_of(Monomial::var(h.nvars(), i + 1)), 1.0);
    prob.equalities.emplace_back(row, x(static_cast<Eigen::Index>(i)));
  }
  add_cone_blocks(prob, layout, h);
  return prob;
}

ConicProblem build_support_problem(const HomogenizedSystem& h, int k, const Eigen::VectorXd& c) {
  if (k < 1) throw Error("relaxation order must be at least 1");
  const std::size_t n = h.base.vars.size();
  if (static_cast<std::size_t>(c.size()) != n)
    throw Error("direction dimension does not match the variable count");
  if (c.cwiseAbs().maxCoeff() == 0.0) throw Error("support direction must be nonzero");
  MomentLayout layout = make_layout(h.nvars(), k);
  ConicProblem prob;
  prob.num_y = layout.dim();
  LinearFunctional row0;
  row0.add(layout.index_of(Monomial::var(h.nvars(), 0)), 1.0);
  prob.equalities.emplace_back(row0, 1.0);
  LinearFunctional obj;  // minimize -c . (L_y(x_1)..L_y(x_n))
  for (std::size_t i = 0; i < n; ++i)
    obj.add(layout.index_of(Monomial::var(h.nvars(), i + 1)), -c(static_cast<Eigen::Index>(i)));
  prob.objective = obj;
  add_cone_blocks(prob, layout, h);
  return prob;
}

MembershipVerdict is_member(const HomogenizedSystem& h, int k, const Eigen::VectorXd& x,
                            const SolverSettings& s) {
  ConicProblem prob = build_membership_problem(h, k, x);
  Solution sol = solve(prob, s);
  return verdict_from_solution(prob, sol, k, s);
}

SupportResult support_value(const HomogenizedSystem& h, int k, const Eigen::VectorXd& c,
                            const SolverSettings& s) {
  ConicProblem prob = build_support_problem(h, k, c);
  Solution sol = solve(prob, s);
  SupportResult r;
  r.direction = c;
  r.order = k;
  r.detail = sol.message;
  const std::size_t n = h.base.vars.size();
  MomentLayout layout = make_layout(h.nvars(), k);
  switch (sol.status) {
    case SolveStatus::optimal:
    case SolveStatus::inaccurate:
      if (check_solution(prob, sol.y, s).pass) {
        r.status = SupportResult::Status::ok;
        r.value = -sol.objective;
        r.maximizer_proxy.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
          r.maximizer_proxy(static_cast<Eigen::Index>(i)) =
              sol.y(static_cast<Eigen::Index>(layout.index_of(Monomial::var(h.nvars(), i + 1))));
      } else {
        r.detail = "candidate point failed revalidation (" + sol.message + ")";
      }
      break;
    case SolveStatus::unbounded:
      r.status = SupportResult::Status::unbounded;
      r.value = std::numeric_limits<double>::infinity();
      break;
    case SolveStatus::infeasible:
      r.detail = "relaxation infeasible: " + sol.message;
      break;
    default:
      break;
  }
  return r;
}

std::vector<std::pair<double, SupportResult>> trace_support_2d(const HomogenizedSystem& h, int k,
                                                               int num_angles,
                                                               const SolverSettings& s) {
  if (h.base.vars.size() != 2) throw Error("boundary tracing needs a two-variable set");
  if (num_angles < 3) throw Error("need at least three angles");
  std::vector<std::pair<double, SupportResult>> out;
  out.reserve(static_cast<std::size_t>(num_angles));
  for (int i = 0; i < num_angles; ++i) {
    double theta = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(num_angles);
    Eigen::Vector2d c(std::cos(theta), std::sin(theta));
    out.emplace_back(theta, support_value(h, k, c, s));
  }
  return out;
}

ConicProblem build_plain_lasserre(const SemialgebraicSet& s, int k,
                                  const std::optional<Eigen::VectorXd>& x,
                                  const std::optional<Eigen::VectorXd>& c) {
  if (k < 1) throw Error("relaxation order must be at least 1");
  if (x.has_value() == c.has_value())
    throw Error("give exactly one of a membership point or a support direction");
  const std::size_t n = s.vars.size();
  MomentLayout layout = make_layout(n, k);
  ConicProblem prob;
  prob.num_y = layout.dim();
  LinearFunctional one_row;
  one_row.add(layout.index_of(Monomial::one(n)), 1.0);
  prob.equalities.emplace_back(one_row, 1.0);
  if (x) {
    if (static_cast<std::size_t>(x->size()) != n) throw Error("point dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      LinearFunctional row;
      row.add(layout.index_of(Monomial::var(n, i)), 1.0);
      prob.equalities.emplace_back(row, (*x)(static_cast<Eigen::Index>(i)));
    }
  } else {
    if (static_cast<std::size_t>(c->size()) != n) throw Error("direction dimension mismatch");
    LinearFunctional obj;
    for (std::size_t i = 0; i < n; ++i)
      obj.add(layout.index_of(Monomial::var(n, i)), -(*c)(static_cast<Eigen::Index>(i)));
    prob.objective = obj;
  }
  prob.psd_blocks.push_back(moment_template(layout));
  for (const auto& g : s.inequalities)
    if (localizing_order(layout, g) >= 0) prob.psd_blocks.push_back(localizing_template(layout, g));
  for (const auto& e : s.equalities)
    if (localizing_order(layout, e) >= 0) prob.zero_blocks.push_back(localizing_template(layout, e));
  return prob;
}

SupportResult plain_support_value(const SemialgebraicSet& set, int k, const Eigen::VectorXd& c,
                                  const SolverSettings& s) {
  ConicProblem prob = build_plain_lasserre(set, k, std::nullopt, c);
  Solution sol = solve(prob, s);
  SupportResult r;
  r.direction = c;
  r.order = k;
  r.detail = sol.message;
  const std::size_t n = set.vars.size();
  MomentLayout layout = make_layout(n, k);
  switch (sol.status) {
    case SolveStatus::optimal:
    case SolveStatus::inaccurate:
      if (check_solution(prob, sol.y, s).pass) {
        r.status = SupportResult::Status::ok;
        r.value = -sol.objective;
        r.maximizer_proxy.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
          r.maximizer_proxy(static_cast<Eigen::Index>(i)) =
              sol.y(static_cast<Eigen::Index>(layout.index_of(Monomial::var(n, i))));
      } else {
        r.detail = "candidate point failed revalidation (" + sol.message + ")";
      }
      break;
    case SolveStatus::unbounded:
      r.status = SupportResult::Status::unbounded;
      r.value = std::numeric_limits<double>::infinity();
      break;
    case SolveStatus::infeasible:
      r.detail = "relaxation infeasible: " + sol.message;
      break;
    default: {
      // weakly unbounded relaxations admit no strict improving ray; probe the
      // value level set c.x = kProbeLevel instead. A validated pseudo-moment
      // vector there reaches every smaller level by convexity, so the value
      // is reported as unbounded.
      double lam = kProbeLevel / c.cwiseAbs().maxCoeff();
      ConicProblem slice = build_plain_lasserre(rescale_vars(set, lam), k, std::nullopt, c);
      slice.objective.reset();
      LinearFunctional level;
      for (std::size_t i = 0; i < n; ++i)
        level.add(layout.index_of(Monomial::var(n, i)), c(static_cast<Eigen::Index>(i)));
      slice.equalities.emplace_back(level, kProbeLevel / lam);
      Solution probe = solve(slice, s);
      if ((probe.status == SolveStatus::optimal || probe.status == SolveStatus::inaccurate) &&
          probe.y.size() > 0 && check_solution(slice, probe.y, s).pass) {
        r.status = SupportResult::Status::unbounded;
        r.value = std::numeric_limits<double>::infinity();
        r.detail = "objective level 1e6 validated as reachable";
      } else {
        r.detail = "direct solve inconclusive (" + sol.message + "); level probe " +
                   to_string(probe.status);
      }
      break;
    }
  }
  return r;
}

}  // namespace conehull
