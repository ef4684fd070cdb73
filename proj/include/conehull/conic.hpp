#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>

#include "conehull/basis.hpp"

namespace conehull {

enum class SolveStatus { optimal, infeasible, unbounded, inaccurate, solver_failure };

std::string to_string(SolveStatus s);

struct SolverSettings {
  double eq_tol = 1e-8;    // equality and zero-block residual tolerance
  double psd_tol = 1e-7;   // allowed negative part of block eigenvalues
  double cert_tol = 1e-6;  // independent certificate verification tolerance
  int max_iters = 200;
  double feastol = 1e-8;  // interior-point feasibility target
  double abstol = 1e-9;   // absolute duality gap target
  double reltol = 1e-9;
  std::uint64_t seed = 0;     // echoed by callers that sample; solve() is deterministic
  std::size_t max_y = 5000;   // size guard, raise explicitly for larger problems
};

// min objective . y  subject to  eq . y = rhs, psd blocks >= 0, zero blocks = 0.
// Matrix templates are linear in y (no constant part); constants enter through
// pinned coordinates with an equality row.
struct ConicProblem {
  std::size_t num_y = 0;
  std::optional<LinearFunctional> objective;  // feasibility problem when absent
  std::vector<std::pair<LinearFunctional, double>> equalities;
  std::vector<MatrixTemplate> psd_blocks;
  std::vector<MatrixTemplate> zero_blocks;
};

// Farkas combination refuting feasibility:
//   sum_l <W_l, block_l(y)> + sum_r mu_r * (a_r . y) == 0 for every y,
//   with W_l >= 0 and mu . rhs = 1.
// Rows r run over the canonical equality list (problem equalities followed by
// the flattened zero-block entries, upper triangle row-major).
struct InfeasibilityCertificate {
  std::vector<double> eq_multipliers;
  std::vector<Eigen::MatrixXd> block_multipliers;
};

// Direction d with block_l(d) >= 0, a_r . d = 0 and objective . d = -1:
// marching along d stays feasible and drives the objective to -infinity.
struct UnboundedRay {
  Eigen::VectorXd direction;
};

struct Solution {
  SolveStatus status = SolveStatus::solver_failure;
  Eigen::VectorXd y;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  std::optional<InfeasibilityCertificate> infeasibility;
  std::optional<UnboundedRay> ray;
  std::string message;
};

Solution solve(const ConicProblem& p, const SolverSettings& s = {});

// Cumulative solve() activity on this thread since the last reset. The solver
// is deterministic, so these counters are reproducible and safe to echo in
// byte-comparable reports where wall time is not.
struct SolveCounters {
  std::uint64_t solves = 0;
  std::uint64_t iterations = 0;
};

SolveCounters solve_counters();
void reset_solve_counters();

// Equalities followed by flattened zero-block entries; the row order every
// certificate refers to.
std::vector<std::pair<LinearFunctional, double>> canonical_equalities(const ConicProblem& p);

struct ResidualReport {
  double max_eq_violation = 0.0;
  double min_block_eig = 0.0;  // least eigenvalue over all PSD blocks, 0 if none
  double max_zero_violation = 0.0;
  bool pass = false;
};

// Re-validates a candidate point against the raw problem data.
ResidualReport check_solution(const ConicProblem& p, const Eigen::VectorXd& y,
                              const SolverSettings& s = {});

bool check_infeasibility(const ConicProblem& p, const InfeasibilityCertificate& cert,
                         const SolverSettings& s = {});

bool check_ray(const ConicProblem& p, const UnboundedRay& ray, const SolverSettings& s = {});

}  // namespace conehull
