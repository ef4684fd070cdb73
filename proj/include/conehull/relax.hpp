#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "conehull/conic.hpp"
#include "conehull/poly.hpp"

namespace conehull {

// Homogenized description of a base set: inequality generators become
// homogeneous forms over (x0, x1..xn), x0 itself joins the generator list,
// and equalities are the unit-sphere pin plus the homogenized base equalities.
struct HomogenizedSystem {
  SemialgebraicSet base;
  std::string hom_var;
  std::vector<std::string> vars;  // hom_var first, then base variables
  std::vector<Polynomial> generators;            // [g~_1 .. g~_m, x0]
  std::vector<int> generator_orders;             // ceil(deg/2) per generator
  std::vector<Polynomial> equality_generators;   // [|x~|^2 - 1, homogenized base equalities]

  std::size_t nvars() const { return vars.size(); }
};

HomogenizedSystem homogenize_system(const SemialgebraicSet& s);

enum class Decision { member, not_member, undetermined };
std::string to_string(Decision d);

struct MembershipVerdict {
  Decision decision = Decision::undetermined;
  int order = 0;
  Eigen::VectorXd witness;  // validated moment vector when member
  double tol_eq = 0.0, tol_psd = 0.0;
  std::string detail;
};

struct SupportResult {
  enum class Status { ok, unbounded, undetermined };
  Status status = Status::undetermined;
  Eigen::VectorXd direction;
  int order = 0;
  double value = std::numeric_limits<double>::quiet_NaN();  // +inf when unbounded
  Eigen::VectorXd maximizer_proxy;                          // (L_y(X_1)..L_y(X_n)) when finite
  std::string detail;
};

std::string to_string(SupportResult::Status s);

// Feasibility problem: L_y(x0) = 1, L_y(x_i) = x_i, moment matrix and
// localizing blocks PSD, equality-generator blocks zero. Generators whose
// half-degree exceeds k contribute no block at that order.
ConicProblem build_membership_problem(const HomogenizedSystem& h, int k, const Eigen::VectorXd& x);

// Same cone, objective max sum_i c_i L_y(x_i), only the x0 row pinned.
ConicProblem build_support_problem(const HomogenizedSystem& h, int k, const Eigen::VectorXd& c);

MembershipVerdict is_member(const HomogenizedSystem& h, int k, const Eigen::VectorXd& x,
                            const SolverSettings& s = {});

SupportResult support_value(const HomogenizedSystem& h, int k, const Eigen::VectorXd& c,
                            const SolverSettings& s = {});

// Directions (cos t, sin t), t = 2*pi*i/num_angles, ordered by angle.
std::vector<std::pair<double, SupportResult>> trace_support_2d(const HomogenizedSystem& h, int k,
                                                               int num_angles,
                                                               const SolverSettings& s = {});

// Baseline relaxation over the raw generators, no homogenization: exactly one
// of x (membership) or c (support objective) must be given.
ConicProblem build_plain_lasserre(const SemialgebraicSet& s, int k,
                                  const std::optional<Eigen::VectorXd>& x,
                                  const std::optional<Eigen::VectorXd>& c);

SupportResult plain_support_value(const SemialgebraicSet& set, int k, const Eigen::VectorXd& c,
                                  const SolverSettings& s = {});

}  // namespace conehull
