#include "conehull/conic.hpp"

#include <cmath>
#include <limits>

namespace conehull {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::inaccurate: return "inaccurate";
    case SolveStatus::solver_failure: return "solver_failure";
  }
  return "unknown";
}

std::vector<std::pair<LinearFunctional, double>> canonical_equalities(const ConicProblem& p) {
  std::vector<std::pair<LinearFunctional, double>> rows = p.equalities;
  for (const auto& zb : p.zero_blocks)
    for (std::size_t i = 0; i < zb.size; ++i)
      for (std::size_t j = i; j < zb.size; ++j) rows.emplace_back(zb.at(i, j), 0.0);
  return rows;
}

ResidualReport check_solution(const ConicProblem& p, const Eigen::VectorXd& y,
                              const SolverSettings& s) {
  if (y.size() != static_cast<Eigen::Index>(p.num_y)) throw Error("solution has wrong dimension");
  ResidualReport r;
  if (!y.allFinite()) {
    r.max_eq_violation = std::numeric_limits<double>::infinity();
    r.pass = false;
    return r;
  }
  bool ok = true;
  for (const auto& [f, rhs] : p.equalities) {
    double v = std::abs(f.apply(y) - rhs);
    r.max_eq_violation = std::max(r.max_eq_violation, v);
    if (v > s.eq_tol * (1.0 + std::abs(rhs))) ok = false;
  }
  r.min_block_eig = 0.0;
  bool first = true;
  for (const auto& blk : p.psd_blocks) {
    Eigen::MatrixXd m = instantiate(blk, y);
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    double emin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
    if (first || emin < r.min_block_eig) r.min_block_eig = emin;
    first = false;
    if (emin < -s.psd_tol * scale) ok = false;
  }
  for (const auto& zb : p.zero_blocks) {
    Eigen::MatrixXd m = instantiate(zb, y);
    double v = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
    r.max_zero_violation = std::max(r.max_zero_violation, v);
    if (v > s.eq_tol) ok = false;
  }
  r.pass = ok;
  return r;
}

namespace {

// adjoint of the block maps: out_j = sum_l <W_l, d block_l / d y_j>
Eigen::VectorXd block_adjoint(const ConicProblem& p, const std::vector<Eigen::MatrixXd>& W) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.num_y));
  for (std::size_t l = 0; l < p.psd_blocks.size(); ++l) {
    const auto& blk = p.psd_blocks[l];
    for (std::size_t i = 0; i < blk.size; ++i)
      for (std::size_t j = i; j < blk.size; ++j) {
        double w = (i == j) ? W[l](i, j) : W[l](i, j) + W[l](j, i);
        for (const auto& [idx, c] : blk.at(i, j).terms)
          out(static_cast<Eigen::Index>(idx)) += c * w;
      }
  }
  return out;
}

}  // namespace

bool check_infeasibility(const ConicProblem& p, const InfeasibilityCertificate& cert,
                         const SolverSettings& s) {
  auto rows = canonical_equalities(p);
  if (cert.eq_multipliers.size() != rows.size()) return false;
  if (cert.block_multipliers.size() != p.psd_blocks.size()) return false;
  for (double m : cert.eq_multipliers)
    if (!std::isfinite(m)) return false;
  for (const auto& W : cert.block_multipliers)
    if (!W.allFinite()) return false;

  double mu_b = 0.0;
  Eigen::VectorXd comb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.num_y));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double m = cert.eq_multipliers[r];
    mu_b += m * rows[r].second;
    for (const auto& [idx, c] : rows[r].first.terms)
      comb(static_cast<Eigen::Index>(idx)) += m * c;
  }
  for (std::size_t l = 0; l < p.psd_blocks.size(); ++l) {
    const Eigen::MatrixXd& W = cert.block_multipliers[l];
    if (W.rows() != static_cast<Eigen::Index>(p.psd_blocks[l].size) || W.rows() != W.cols())
      return false;
    if (W.size() > 0) {
      double ws = std::max(1.0, W.cwiseAbs().maxCoeff());
      double emin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues().minCoeff();
      if (emin < -s.cert_tol * ws) return false;
    }
  }
  comb += block_adjoint(p, cert.block_multipliers);
  if (!(mu_b > 0.0)) return false;
  // the combination must vanish relative to the strength mu.b of the contradiction;
  // a near-certificate with large multipliers but tiny mu.b refutes nothing
  return comb.cwiseAbs().maxCoeff() <= s.cert_tol * mu_b;
}

bool check_ray(const ConicProblem& p, const UnboundedRay& ray, const SolverSettings& s) {
  if (!p.objective) return false;
  if (ray.direction.size() != static_cast<Eigen::Index>(p.num_y)) return false;
  const Eigen::VectorXd& d = ray.direction;
  if (!d.allFinite()) return false;
  double dinf = d.cwiseAbs().maxCoeff();
  if (!(dinf > 0.0)) return false;
  // normalize to unit sup norm; the objective must improve at a definite rate,
  // otherwise the direction is a numerically meaningless near-ray
  Eigen::VectorXd dn = d / dinf;
  if (!(p.objective->apply(dn) < -s.cert_tol)) return false;
  for (const auto& [f, rhs] : p.equalities) {
    (void)rhs;  // rays live in the homogeneous part
    double fs = 1.0;
    for (const auto& [idx, c] : f.terms) fs = std::max(fs, std::abs(c));
    if (std::abs(f.apply(dn)) > s.cert_tol * fs) return false;
  }
  for (const auto& blk : p.psd_blocks) {
    Eigen::MatrixXd m = instantiate(blk, dn);
    if (m.size() == 0) continue;
    double bs = std::max(1.0, m.cwiseAbs().maxCoeff());
    double emin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
    if (emin < -s.cert_tol * bs) return false;
  }
  for (const auto& zb : p.zero_blocks) {
    Eigen::MatrixXd m = instantiate(zb, dn);
    if (m.size() > 0 && m.cwiseAbs().maxCoeff() > s.cert_tol) return false;
  }
  return true;
}

}  // namespace conehull
