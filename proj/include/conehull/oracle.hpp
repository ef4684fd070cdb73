#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "conehull/poly.hpp"

namespace conehull {

struct SampleCloud {
  std::vector<Eigen::VectorXd> points;  // every point re-validates against the set
  std::vector<std::array<double, 2>> box;
  std::uint64_t seed = 0;
  bool truncated = false;  // acceptance too low, fewer points than requested
};

// Rejection sampling in the box; equality constraints are hit by Newton
// projection onto the variety before validation. Throws when nothing at all
// is accepted within the attempt budget.
SampleCloud sample_set(const SemialgebraicSet& s, const std::vector<std::array<double, 2>>& box,
                       std::size_t count, std::uint64_t seed);

// Counterclockwise hull vertices (monotone chain); collinear input degrades
// to a segment, fewer than three points pass through unchanged.
std::vector<Eigen::Vector2d> hull_2d(const std::vector<Eigen::Vector2d>& pts);

struct NumericSupport {
  double value = 0.0;
  Eigen::VectorXd argmax;
  bool box_saturated = false;  // maximizer sits on the box wall, true support may be larger
};

// max c.x over the cloud: an inner (lower) estimate of the support of cl co S.
NumericSupport support_numeric(const SampleCloud& cloud, const Eigen::VectorXd& c);

// Newton iteration onto the equality variety; false when it fails to converge.
// No-op (true) for sets without equalities.
bool polish_onto_equalities(const SemialgebraicSet& s, Eigen::VectorXd& x);

}  // namespace conehull
