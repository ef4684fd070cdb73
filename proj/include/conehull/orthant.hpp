#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "conehull/conic.hpp"
#include "conehull/poly.hpp"
#include "conehull/relax.hpp"

namespace conehull {

// Sign pattern of one orthant piece: bit e_i adds the constraint
// (-1)^{e_i} x_i >= 0.
struct OrthantPattern {
  std::vector<int> e;
};

// S intersected with each requested orthant. The default is all 2^n patterns
// (refused above four variables); an explicit subset asserts that the caller
// knows the pieces still cover S.
std::vector<std::pair<OrthantPattern, SemialgebraicSet>> split_orthants(
    const SemialgebraicSet& s, const std::optional<std::vector<OrthantPattern>>& patterns = {});

// weights are L_{y_e}(x0) per piece when member: the mass each piece
// contributes to the convex combination reproducing x.
struct UnionHullVerdict {
  Decision decision = Decision::undetermined;
  int order = 0;
  std::vector<double> weights;
  bool over_approximation_possible = false;
  std::string detail;
};

// One joint SDP: each piece keeps its full moment cone minus the x0
// normalization, and the pieces are tied together by sum_e L_{y_e}(x0) = 1,
// sum_e L_{y_e}(x_i) = x_i. Piece weights need no extra variables, and their
// nonnegativity is already forced by the x0-localizing blocks.
UnionHullVerdict union_hull_membership(const std::vector<HomogenizedSystem>& pieces, int k,
                                       const Eigen::VectorXd& x, const SolverSettings& s = {});

// Stabilization probe for the over-approximation caveat: true when every
// piece's support values agree between orders k and k+1 on a fixed set of
// probe directions. Disagreement means the union hull may still shrink at
// higher orders, so member verdicts at k could over-approximate. Callers
// evaluate this once per piece set and merge it into verdicts.
bool union_stabilized(const std::vector<HomogenizedSystem>& pieces, int k,
                      const SolverSettings& s = {});

}  // namespace conehull
