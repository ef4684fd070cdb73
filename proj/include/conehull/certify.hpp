#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conehull/conic.hpp"
#include "conehull/poly.hpp"
#include "conehull/relax.hpp"

namespace conehull {

enum class CertOutcome { found, not_found, undetermined };

std::string to_string(CertOutcome o);

// Weighted sum-of-squares identity
//   target = sum_j (basis_j' G_j basis_j) * generators[j] + sum_l multiplier_l * equality_l
// with every G_j PSD. Generator 0 is the constant 1; generators whose
// half-degree exceeds the order carry no block and are omitted from the list.
// residual is the largest coefficient mismatch of the reconstructed identity,
// recomputed from the blocks by polynomial arithmetic, not by the solver.
struct QModuleCertificate {
  CertOutcome outcome = CertOutcome::undetermined;
  Polynomial target;
  int order = 0;
  std::vector<Polynomial> generators;
  std::vector<std::vector<Monomial>> gram_bases;
  std::vector<Eigen::MatrixXd> gram_blocks;
  std::vector<Polynomial> equality_generators;
  std::vector<Polynomial> equality_multipliers;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

// Left side of the certificate identity, rebuilt from the stored blocks.
Polynomial reconstruct(const QModuleCertificate& c);
double reconstruction_residual(const QModuleCertificate& c);

// Searches the degree-2k truncated quadratic module of the homogenized
// generators (sphere pin and homogenized equalities enter through free
// multipliers). found requires a checker-validated solve and residual <= 1e-6;
// not_found reports a refuted order, not a proof that no order works.
QModuleCertificate qmodule_membership(const Polynomial& f, const HomogenizedSystem& h, int k,
                                      const SolverSettings& s = {});

// Same search over the raw generators of a base set.
QModuleCertificate qmodule_membership(const Polynomial& f, const SemialgebraicSet& set, int k,
                                      const SolverSettings& s = {});

// Linear form ell with unit coefficient norm that is certified positive on the
// spherical slice of the homogenized cone, away from the origin. route is
// "direct" when ell - margin itself sits in the quadratic module, "squared"
// when the module certifies ell^2 - margin^2 * |x|^2 and a second certificate
// (stored in sign_certificate) excludes the branch ell <= -margin: either
// ell * x0, or ell(1, x) over the base generators, or a lower bound
// ell >= eps with eps > -margin.
struct PointednessCertificate {
  CertOutcome outcome = CertOutcome::undetermined;
  Polynomial ell;
  double margin = 0.0;
  int order = 0;
  std::string route;
  std::optional<QModuleCertificate> certificate;
  std::optional<QModuleCertificate> sign_certificate;
  std::string detail;
};

PointednessCertificate pointedness_certificate(const HomogenizedSystem& h, int k,
                                               const SolverSettings& s = {});

// True when every inequality generator has even total degree, so the set's
// description cannot separate a direction from its negative at infinity.
bool even_degree_obstruction(const SemialgebraicSet& s);

// Heuristic screen for convergence trouble: the closure of the relaxation
// sequence can exceed cl co S when the set is unbounded and its description
// is blind at infinity. recommendation is an affine generator, redundant on
// the set itself, whose homogenization repairs the description; it is filled
// only when all three indicators agree.
struct ClosednessReport {
  bool structural_obstruction = false;
  bool noncompact_evidence = false;
  double max_sample_norm = 0.0;
  std::optional<PointednessCertificate> pointedness;
  std::optional<Polynomial> recommendation;
};

ClosednessReport closedness_report(const SemialgebraicSet& set, const HomogenizedSystem& h, int k,
                                   const SolverSettings& s = {});

// Appends an affine inequality after validating it against samples of the
// set: any sampled point with ell < -1e-7 is an error, the generator must be
// redundant. Sampling fails loudly when the box misses the set entirely.
SemialgebraicSet augment_generators(const SemialgebraicSet& set, const Polynomial& ell,
                                    const std::vector<std::array<double, 2>>& box,
                                    std::size_t samples = 500, std::uint64_t seed = 0);

}  // namespace conehull
