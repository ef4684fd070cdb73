#include "conehull/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "conehull/basis.hpp"
#include "conehull/oracle.hpp"

namespace conehull {

std::string to_string(CertOutcome o) {
  switch (o) {
    case CertOutcome::found:
      return "found";
    case CertOutcome::not_found:
      return "not_found";
    case CertOutcome::undetermined:
      return "undetermined";
  }
  return "?";
}

namespace {

constexpr double kCoeffTol = 1e-6;     // accepted coefficient mismatch in a reconstructed identity
constexpr double kMarginFloor = 1e-4;  // smallest positivity margin reported as found
constexpr double kFarNorm = 256.0;     // sample norm taken as evidence of noncompactness

int half_degree_up(const Polynomial& p) { return (p.total_degree() + 1) / 2; }

Polynomial norm_squared(const std::vector<std::string>& vars) {
  Polynomial p(vars);
  for (std::size_t i = 0; i < vars.size(); ++i) p.set_coeff(Monomial::var(vars.size(), i, 2), 1.0);
  return p;
}

Polynomial linear_form(const std::vector<std::string>& vars, const Eigen::VectorXd& g) {
  Polynomial p(vars);
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (g(static_cast<Eigen::Index>(i)) != 0.0)
      p.set_coeff(Monomial::var(vars.size(), i), g(static_cast<Eigen::Index>(i)));
  return p;
}

// One linear row per monomial of degree <= 2k: the Gram blocks of the kept
// generators and the free multiplier coefficients of the equality generators
// must combine to the target coefficient on every row.
struct SosAssembler {
  std::vector<std::string> vars;
  int k = 0;
  ConicProblem prob;
  std::vector<Polynomial> gens;  // kept generators, unit first
  std::vector<std::vector<Monomial>> bases;
  std::vector<std::size_t> offsets;
  std::vector<Polynomial> eqs;  // kept equality generators
  std::vector<std::vector<Monomial>> eq_bases;
  std::vector<std::size_t> eq_offsets;
  std::map<Monomial, std::size_t, GrlexLess> row_of;

  SosAssembler(const std::vector<std::string>& v, const std::vector<Polynomial>& generators,
               const std::vector<Polynomial>& equalities, int order)
      : vars(v), k(order) {
    if (k < 0) throw Error("negative certificate order");
    auto monos = enumerate_basis(vars.size(), 2 * k);
    prob.equalities.assign(monos.size(), {LinearFunctional{}, 0.0});
    for (std::size_t r = 0; r < monos.size(); ++r) row_of.emplace(monos[r], r);

    add_gram(Polynomial::constant(std::vector<std::string>(vars), 1.0), 0);
    for (const auto& g : generators) {
      if (g.is_zero()) continue;
      int kj = half_degree_up(g);
      if (k - kj < 0) continue;  // no multiplier fits at this order
      add_gram(g, kj);
    }
    for (const auto& h : equalities) {
      if (h.is_zero()) continue;
      if (2 * k - h.total_degree() < 0) continue;
      add_multiplier(h);
    }
  }

  void add_gram(const Polynomial& g, int kj) {
    auto basis = enumerate_basis(vars.size(), k - kj);
    const std::size_t m = basis.size();
    const std::size_t off = prob.num_y;
    prob.num_y += m * (m + 1) / 2;
    MatrixTemplate t(m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        std::size_t idx = off + MatrixTemplate::tri_index(m, a, b);
        t.at(a, b).add(idx, 1.0);
        Monomial ab = basis[a] * basis[b];
        for (const auto& [mono, c] : g.terms())
          prob.equalities[row_of.at(ab * mono)].first.add(idx, (a == b ? 1.0 : 2.0) * c);
      }
    prob.psd_blocks.push_back(std::move(t));
    gens.push_back(g);
    bases.push_back(std::move(basis));
    offsets.push_back(off);
  }

  void add_multiplier(const Polynomial& h) {
    auto basis = enumerate_basis(vars.size(), 2 * k - h.total_degree());
    const std::size_t off = prob.num_y;
    prob.num_y += basis.size();
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (const auto& [mono, c] : h.terms())
        prob.equalities[row_of.at(basis[i] * mono)].first.add(off + i, c);
    eqs.push_back(h);
    eq_bases.push_back(std::move(basis));
    eq_offsets.push_back(off);
  }

  std::size_t add_scalar() { return prob.num_y++; }

  void set_target(const Polynomial& f) {
    if (f.vars() != vars) throw Error("target variable list differs from the generator system");
    for (const auto& [mono, c] : f.terms()) {
      auto it = row_of.find(mono);
      if (it == row_of.end()) throw Error("target degree exceeds twice the certificate order");
      prob.equalities[it->second].second = c;
    }
  }

  // found requires the checker to accept the point and the identity to
  // reconstruct within kCoeffTol; a verified Farkas certificate gives
  // not_found, anything else stays undetermined
  QModuleCertificate harvest(const Polynomial& target, const Solution& sol,
                             const SolverSettings& s) const {
    QModuleCertificate c;
    c.target = target;
    c.order = k;
    c.generators = gens;
    c.equality_generators = eqs;
    c.detail = sol.message;
    const bool solved =
        (sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate) &&
        sol.y.size() == static_cast<Eigen::Index>(prob.num_y);
    if (solved) {
      if (!check_solution(prob, sol.y, s).pass) {
        c.outcome = CertOutcome::undetermined;
        c.detail = "solve reported " + to_string(sol.status) + " but the checker rejected the point";
        return c;
      }
      c.gram_bases = bases;
      for (std::size_t j = 0; j < bases.size(); ++j)
        c.gram_blocks.push_back(instantiate(prob.psd_blocks[j], sol.y));
      for (std::size_t l = 0; l < eqs.size(); ++l) {
        Polynomial q(vars);
        for (std::size_t i = 0; i < eq_bases[l].size(); ++i)
          q.set_coeff(eq_bases[l][i], sol.y(static_cast<Eigen::Index>(eq_offsets[l] + i)));
        c.equality_multipliers.push_back(std::move(q));
      }
      c.residual = reconstruction_residual(c);
      if (c.residual <= kCoeffTol) {
        c.outcome = CertOutcome::found;
      } else {
        c.outcome = CertOutcome::undetermined;
        c.detail = "reconstruction residual " + format_double(c.residual) + " above tolerance";
      }
      return c;
    }
    if (sol.status == SolveStatus::infeasible) {
      c.outcome = CertOutcome::not_found;
      c.detail = "no representation at this order";
    } else {
      c.outcome = CertOutcome::undetermined;
      if (c.detail.empty()) c.detail = to_string(sol.status);
    }
    return c;
  }
};

QModuleCertificate search_module(SosAssembler& a, const Polynomial& f, const SolverSettings& s) {
  a.set_target(f);
  Solution sol = solve(a.prob, s);
  return a.harvest(f, sol, s);
}

// |g|_2 <= 1 as a PSD block [[I, g], [g', 1]]; constants enter through the
// pinned coordinate `one`
void add_ball_block(ConicProblem& prob, const std::vector<std::size_t>& gi, std::size_t one) {
  const std::size_t n = gi.size();
  MatrixTemplate ball(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    ball.at(i, i).add(one, 1.0);
    ball.at(i, n).add(gi[i], 1.0);
  }
  ball.at(n, n).add(one, 1.0);
  prob.psd_blocks.push_back(std::move(ball));
  LinearFunctional pin;
  pin.add(one, 1.0);
  prob.equalities.emplace_back(pin, 1.0);
}

// max eps with ell - eps in the module, ell fixed
std::pair<double, QModuleCertificate> certify_direct(const HomogenizedSystem& h, int k,
                                                     const Polynomial& ell,
                                                     const SolverSettings& s) {
  SosAssembler a(h.vars, h.generators, h.equality_generators, k);
  a.set_target(ell);
  std::size_t eps = a.add_scalar();
  a.prob.equalities[a.row_of.at(Monomial::one(h.nvars()))].first.add(eps, 1.0);
  LinearFunctional obj;
  obj.add(eps, -1.0);
  a.prob.objective = obj;
  Solution sol = solve(a.prob, s);
  double margin = std::numeric_limits<double>::quiet_NaN();
  if ((sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate) &&
      sol.y.size() == static_cast<Eigen::Index>(a.prob.num_y))
    margin = sol.y(static_cast<Eigen::Index>(eps));
  Polynomial target =
      std::isfinite(margin)
          ? ell - Polynomial::constant(std::vector<std::string>(h.vars), margin)
          : ell;
  return {margin, a.harvest(target, sol, s)};
}

// max t with ell^2 - t * |x|^2 in the module; on the unit sphere this bounds
// |ell| away from zero without fixing its sign
std::pair<double, QModuleCertificate> certify_squared(const HomogenizedSystem& h, int k,
                                                      const Polynomial& ell,
                                                      const SolverSettings& s) {
  SosAssembler a(h.vars, h.generators, h.equality_generators, k);
  a.set_target(ell * ell);
  std::size_t tv = a.add_scalar();
  for (std::size_t i = 0; i < h.nvars(); ++i)
    a.prob.equalities[a.row_of.at(Monomial::var(h.nvars(), i, 2))].first.add(tv, 1.0);
  LinearFunctional obj;
  obj.add(tv, -1.0);
  a.prob.objective = obj;
  Solution sol = solve(a.prob, s);
  double t = std::numeric_limits<double>::quiet_NaN();
  if ((sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate) &&
      sol.y.size() == static_cast<Eigen::Index>(a.prob.num_y))
    t = sol.y(static_cast<Eigen::Index>(tv));
  Polynomial target = std::isfinite(t) ? ell * ell - norm_squared(h.vars).scaled(t) : ell * ell;
  return {t, a.harvest(target, sol, s)};
}

struct DirectSearch {
  Eigen::VectorXd g;
  double eps = std::numeric_limits<double>::quiet_NaN();
  bool usable = false;
  bool failed = false;
};

// max eps over unit-ball linear forms ell = g . x: the degree-one rows pick
// up -g, the constant row picks up +eps
DirectSearch search_direct(const HomogenizedSystem& h, int k, const SolverSettings& s) {
  SosAssembler a(h.vars, h.generators, h.equality_generators, k);
  const std::size_t n1 = h.nvars();
  std::size_t eps = a.add_scalar();
  std::vector<std::size_t> gi;
  for (std::size_t i = 0; i < n1; ++i) gi.push_back(a.add_scalar());
  std::size_t one = a.add_scalar();
  a.prob.equalities[a.row_of.at(Monomial::one(n1))].first.add(eps, 1.0);
  for (std::size_t i = 0; i < n1; ++i)
    a.prob.equalities[a.row_of.at(Monomial::var(n1, i))].first.add(gi[i], -1.0);
  add_ball_block(a.prob, gi, one);
  LinearFunctional obj;
  obj.add(eps, -1.0);
  a.prob.objective = obj;
  Solution sol = solve(a.prob, s);

  DirectSearch out;
  if (!((sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate) &&
        sol.y.size() == static_cast<Eigen::Index>(a.prob.num_y))) {
    out.failed = sol.status == SolveStatus::solver_failure;
    return out;
  }
  if (!check_solution(a.prob, sol.y, s).pass) {
    out.failed = true;
    return out;
  }
  out.eps = sol.y(static_cast<Eigen::Index>(eps));
  out.g.resize(static_cast<Eigen::Index>(n1));
  for (std::size_t i = 0; i < n1; ++i) out.g(static_cast<Eigen::Index>(i)) = sol.y(static_cast<Eigen::Index>(gi[i]));
  out.usable = out.eps > kMarginFloor && out.g.norm() > 1e-9;
  return out;
}

// nearest fraction p/q with q <= maxq; values off every grid point stay put
double snap_ratio(double r, int maxq, double tol) {
  double best = r, err = tol;
  for (int q = 1; q <= maxq; ++q) {
    double cand = std::round(r * q) / q;
    double e = std::abs(r - cand);
    if (e < err) {
      err = e;
      best = cand;
    }
  }
  return best;
}

// prune near-zero coefficients and snap the ratios against the largest one,
// keeping orientation; returns a unit vector
Eigen::VectorXd snap_candidate(const Eigen::VectorXd& g, int maxq, double tol, double prune) {
  Eigen::VectorXd v = g;
  double gmax = v.cwiseAbs().maxCoeff();
  if (!(gmax > 0.0)) return v;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) < prune * gmax) v(i) = 0.0;
  Eigen::Index ref = 0;
  v.cwiseAbs().maxCoeff(&ref);
  double rv = v(ref);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = snap_ratio(v(i) / rv, maxq, tol);
  if (rv < 0.0) v = -v;
  return v.normalized();
}

// max-margin linear form over sampled slice points; boxes grow geometrically
// so directions of escape are represented after normalization
Eigen::VectorXd lp_candidate(const HomogenizedSystem& h, const SolverSettings& s, bool* failed) {
  const std::size_t n = h.base.nvars();
  std::vector<Eigen::VectorXd> pts;
  for (int t = 1; t <= 10; ++t) {
    double w = std::pow(2.0, t);
    std::vector<std::array<double, 2>> box(n, std::array<double, 2>{-w, w});
    SampleCloud cloud;
    try {
      cloud = sample_set(h.base, box, 24, s.seed + static_cast<std::uint64_t>(t));
    } catch (const Error&) {
      continue;  // box may miss the set entirely
    }
    for (const auto& u : cloud.points) {
      Eigen::VectorXd m(static_cast<Eigen::Index>(n) + 1);
      m(0) = 1.0;
      m.tail(static_cast<Eigen::Index>(n)) = u;
      pts.push_back(m / m.norm());
    }
  }
  if (pts.empty()) {
    *failed = true;
    return {};
  }

  ConicProblem lp;
  const std::size_t n1 = n + 1;
  lp.num_y = n1 + 2;  // [g, margin, one]
  std::vector<std::size_t> gi;
  for (std::size_t i = 0; i < n1; ++i) gi.push_back(i);
  const std::size_t mi = n1, one = n1 + 1;
  for (const auto& p : pts) {
    MatrixTemplate row(1);
    for (std::size_t i = 0; i < n1; ++i) row.at(0, 0).add(i, p(static_cast<Eigen::Index>(i)));
    row.at(0, 0).add(mi, -1.0);
    lp.psd_blocks.push_back(std::move(row));
  }
  add_ball_block(lp, gi, one);
  LinearFunctional obj;
  obj.add(mi, -1.0);
  lp.objective = obj;
  Solution sol = solve(lp, s);
  if (!((sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate) &&
        sol.y.size() == static_cast<Eigen::Index>(lp.num_y)) ||
      !check_solution(lp, sol.y, s).pass) {
    *failed = true;
    return {};
  }
  Eigen::VectorXd g = sol.y.head(static_cast<Eigen::Index>(n1));
  if (!(g.norm() > 1e-9)) return {};
  return g.normalized();
}

// coarse and fine rational cleanups of each source vector, then the raw ones;
// failed cleanups cost only an extra solve, the raw candidate is always kept
std::vector<Eigen::VectorXd> candidate_pool(const std::vector<Eigen::VectorXd>& raws) {
  std::vector<Eigen::VectorXd> out;
  auto push = [&out](const Eigen::VectorXd& v) {
    if (!v.size() || !v.allFinite()) return;
    for (const auto& w : out)
      if ((w - v).cwiseAbs().maxCoeff() < 1e-9) return;
    out.push_back(v);
  };
  for (const auto& r : raws) push(snap_candidate(r, 1, 0.3, 0.15));
  for (const auto& r : raws) push(snap_candidate(r, 2, 0.2, 0.1));
  for (const auto& r : raws) push(snap_candidate(r, 8, 0.05, 0.05));
  for (const auto& r : raws) push(r);
  return out;
}

}  // namespace

Polynomial reconstruct(const QModuleCertificate& c) {
  const auto& vars = c.target.vars();
  Polynomial r(vars);
  for (std::size_t j = 0; j < c.gram_blocks.size(); ++j) {
    const auto& basis = c.gram_bases[j];
    Polynomial sigma(vars);
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = a; b < basis.size(); ++b) {
        double w = (a == b ? 1.0 : 2.0) *
                   c.gram_blocks[j](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (w == 0.0) continue;
        Monomial m = basis[a] * basis[b];
        sigma.set_coeff(m, sigma.coeff(m) + w);
      }
    r = r + sigma * c.generators[j];
  }
  for (std::size_t l = 0; l < c.equality_multipliers.size(); ++l)
    r = r + c.equality_multipliers[l] * c.equality_generators[l];
  return r;
}

double reconstruction_residual(const QModuleCertificate& c) {
  Polynomial d = reconstruct(c) - c.target;
  double m = 0.0;
  for (const auto& [mono, coef] : d.terms()) m = std::max(m, std::abs(coef));
  return m;
}

QModuleCertificate qmodule_membership(const Polynomial& f, const HomogenizedSystem& h, int k,
                                      const SolverSettings& s) {
  SosAssembler a(h.vars, h.generators, h.equality_generators, k);
  return search_module(a, f, s);
}

QModuleCertificate qmodule_membership(const Polynomial& f, const SemialgebraicSet& set, int k,
                                      const SolverSettings& s) {
  SosAssembler a(set.vars, set.inequalities, set.equalities, k);
  return search_module(a, f, s);
}

PointednessCertificate pointedness_certificate(const HomogenizedSystem& h, int k,
                                               const SolverSettings& s) {
  if (k < 1) throw Error("pointedness certificates need order at least 1");
  PointednessCertificate out;
  out.order = k;
  bool failures = false;

  // direct route: optimize the form and the margin jointly, then re-certify a
  // cleaned candidate so the certificate belongs to the exact form reported
  DirectSearch ds = search_direct(h, k, s);
  failures = failures || ds.failed;
  if (ds.usable) {
    for (const auto& cand : candidate_pool({ds.g.normalized()})) {
      Polynomial ell = linear_form(h.vars, cand);
      auto [margin, cert] = certify_direct(h, k, ell, s);
      if (cert.outcome == CertOutcome::found && margin > kMarginFloor) {
        out.outcome = CertOutcome::found;
        out.ell = ell;
        out.margin = margin;
        out.route = "direct";
        out.certificate = std::move(cert);
        return out;
      }
      failures = failures || cert.outcome == CertOutcome::undetermined;
    }
  }

  // squared route: the description may be blind to the sign of the form at
  // infinity, so the direct problem caps the margin at zero while the squared
  // form still separates. |ell| >= sqrt(t) on the slice plus any one of the
  // sign pins below forces ell >= sqrt(t) on the closure of the mapped set.
  std::vector<Eigen::VectorXd> raws;
  Eigen::VectorXd lp = lp_candidate(h, s, &failures);
  if (lp.size()) raws.push_back(lp);
  if (ds.g.size() && ds.g.allFinite() && ds.g.norm() > 1e-9) raws.push_back(ds.g.normalized());
  Polynomial x0 = Polynomial::variable(std::vector<std::string>(h.vars), 0);
  for (const auto& c : candidate_pool(raws)) {
    Polynomial ell = linear_form(h.vars, c);
    auto [t, cert] = certify_squared(h, k, ell, s);
    if (!(cert.outcome == CertOutcome::found && t > kMarginFloor * kMarginFloor)) {
      failures = failures || cert.outcome == CertOutcome::undetermined;
      continue;
    }
    const double tau = std::sqrt(t);
    // pin 1: ell * x0 in the module kills the negative branch where x0 > 0
    QModuleCertificate sign = qmodule_membership(ell * x0, h, k, s);
    if (sign.outcome != CertOutcome::found) {
      failures = failures || sign.outcome == CertOutcome::undetermined;
      // pin 2: ell(1, x) over the base generators, same effect
      sign = qmodule_membership(ell.dehomogenize(0), h.base, k, s);
    }
    if (sign.outcome != CertOutcome::found) {
      failures = failures || sign.outcome == CertOutcome::undetermined;
      // pin 3: a certified lower bound ell >= eps with eps > -tau already
      // contradicts the branch ell <= -tau
      auto [eps, low] = certify_direct(h, k, ell, s);
      if (low.outcome == CertOutcome::found && eps > -tau + std::max(1e-3 * tau, 1e-6))
        sign = std::move(low);
      else
        failures = failures || low.outcome == CertOutcome::undetermined;
    }
    if (sign.outcome == CertOutcome::found) {
      out.outcome = CertOutcome::found;
      out.ell = ell;
      out.margin = tau;
      out.route = "squared";
      out.certificate = std::move(cert);
      out.sign_certificate = std::move(sign);
      return out;
    }
  }

  out.outcome = failures ? CertOutcome::undetermined : CertOutcome::not_found;
  out.detail = failures ? "a certificate search could not be decided at this order"
                        : "no certified positive direction at this order";
  return out;
}

bool even_degree_obstruction(const SemialgebraicSet& s) {
  for (const auto& g : s.inequalities) {
    if (g.is_zero()) continue;
    if (!g.is_even_degree()) return false;
  }
  return true;
}

ClosednessReport closedness_report(const SemialgebraicSet& set, const HomogenizedSystem& h, int k,
                                   const SolverSettings& s) {
  ClosednessReport r;
  r.structural_obstruction = even_degree_obstruction(set);
  for (int t = 1; t <= 10; ++t) {
    double w = std::pow(2.0, t);
    std::vector<std::array<double, 2>> box(set.nvars(), std::array<double, 2>{-w, w});
    try {
      SampleCloud cloud = sample_set(set, box, 24, s.seed + 100 + static_cast<std::uint64_t>(t));
      for (const auto& p : cloud.points) r.max_sample_norm = std::max(r.max_sample_norm, p.norm());
    } catch (const Error&) {
    }
  }
  r.noncompact_evidence = r.max_sample_norm > kFarNorm;
  r.pointedness = pointedness_certificate(h, k, s);
  if (r.structural_obstruction && r.noncompact_evidence &&
      r.pointedness->outcome == CertOutcome::found) {
    Polynomial rec = r.pointedness->ell.dehomogenize(0);
    double m = 0.0;
    for (const auto& [mono, c] : rec.terms()) m = std::max(m, std::abs(c));
    if (m > 0.0) r.recommendation = rec.scaled(1.0 / m);
  }
  return r;
}

SemialgebraicSet augment_generators(const SemialgebraicSet& set, const Polynomial& ell,
                                    const std::vector<std::array<double, 2>>& box,
                                    std::size_t samples, std::uint64_t seed) {
  if (ell.vars() != set.vars) throw Error("augmentation generator variable list differs from the set");
  if (!ell.is_zero() && ell.total_degree() > 1) throw Error("augmentation generator must be affine");
  SampleCloud cloud = sample_set(set, box, samples, seed);
  for (const auto& p : cloud.points) {
    std::vector<double> x(p.data(), p.data() + p.size());
    if (ell.eval(x) < -1e-7)
      throw Error("augmentation generator is negative on a sampled point of the set");
  }
  SemialgebraicSet out = set;
  out.inequalities.push_back(ell);
  return out;
}

}  // namespace conehull
