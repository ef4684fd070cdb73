#include "conehull/orthant.hpp"

#include <cmath>

#include "conehull/basis.hpp"

namespace conehull {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kStabilizeTol = 1e-4;  // support agreement between consecutive orders

LinearFunctional shifted(const LinearFunctional& f, std::size_t off) {
  LinearFunctional out;
  for (const auto& [idx, c] : f.terms) out.add(idx + off, c);
  return out;
}

MatrixTemplate shifted(const MatrixTemplate& t, std::size_t off) {
  MatrixTemplate out(t.size);
  for (std::size_t i = 0; i < t.entries.size(); ++i) out.entries[i] = shifted(t.entries[i], off);
  return out;
}

std::vector<Eigen::VectorXd> probe_directions(std::size_t n) {
  std::vector<Eigen::VectorXd> dirs;
  if (n == 2) {
    for (int i = 0; i < 8; ++i) {
      double t = 2.0 * kPi * i / 8;
      dirs.push_back(Eigen::Vector2d(std::cos(t), std::sin(t)));
    }
    return dirs;
  }
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    d(static_cast<Eigen::Index>(i)) = 1.0;
    dirs.push_back(d);
    dirs.push_back(-d);
  }
  if (n > 1) {
    Eigen::VectorXd d = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                  1.0 / std::sqrt(static_cast<double>(n)));
    dirs.push_back(d);
    dirs.push_back(-d);
  }
  return dirs;
}

}  // namespace

std::vector<std::pair<OrthantPattern, SemialgebraicSet>> split_orthants(
    const SemialgebraicSet& s, const std::optional<std::vector<OrthantPattern>>& patterns) {
  const std::size_t n = s.nvars();
  std::vector<OrthantPattern> pats;
  if (patterns) {
    if (patterns->empty()) throw Error("empty orthant pattern subset cannot cover the set");
    for (const auto& p : *patterns) {
      if (p.e.size() != n) throw Error("orthant pattern length differs from the variable count");
      for (int b : p.e)
        if (b != 0 && b != 1) throw Error("orthant pattern bits must be 0 or 1");
    }
    pats = *patterns;
  } else {
    if (n > 4) throw Error("full orthant split over more than 4 variables; pass an explicit pattern subset");
    for (std::size_t m = 0; m < (std::size_t{1} << n); ++m) {
      OrthantPattern p;
      for (std::size_t j = 0; j < n; ++j) p.e.push_back(static_cast<int>((m >> j) & 1));
      pats.push_back(std::move(p));
    }
  }

  std::vector<std::pair<OrthantPattern, SemialgebraicSet>> out;
  for (const auto& p : pats) {
    SemialgebraicSet piece = s;
    for (std::size_t j = 0; j < n; ++j) {
      Polynomial sign = Polynomial::variable(std::vector<std::string>(s.vars), j);
      piece.inequalities.push_back(p.e[j] ? -sign : sign);
    }
    out.emplace_back(p, std::move(piece));
  }
  return out;
}

UnionHullVerdict union_hull_membership(const std::vector<HomogenizedSystem>& pieces, int k,
                                       const Eigen::VectorXd& x, const SolverSettings& s) {
  if (pieces.empty()) throw Error("union membership needs at least one piece");
  const std::size_t n = pieces.front().base.nvars();
  if (static_cast<std::size_t>(x.size()) != n)
    throw Error("point dimension differs from the piece variables");
  for (const auto& p : pieces)
    if (p.base.nvars() != n) throw Error("pieces disagree on the variable count");

  MomentLayout layout = make_layout(n + 1, k);
  const std::size_t x0_idx = layout.index_of(Monomial::var(n + 1, 0));

  ConicProblem joint;
  std::vector<std::size_t> off;
  for (const auto& piece : pieces) {
    ConicProblem pe = build_membership_problem(piece, k, x);
    // per-piece equalities are exactly the x0 pin and the coordinate pins;
    // the joint rows below replace them, everything else is homogeneous in y
    if (pe.equalities.size() != n + 1) throw Error("unexpected per-piece row count");
    off.push_back(joint.num_y);
    for (const auto& b : pe.psd_blocks) joint.psd_blocks.push_back(shifted(b, off.back()));
    for (const auto& b : pe.zero_blocks) joint.zero_blocks.push_back(shifted(b, off.back()));
    joint.num_y += pe.num_y;
  }
  {
    LinearFunctional row;
    for (std::size_t e = 0; e < pieces.size(); ++e) row.add(off[e] + x0_idx, 1.0);
    joint.equalities.emplace_back(std::move(row), 1.0);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    LinearFunctional row;
    std::size_t idx = layout.index_of(Monomial::var(n + 1, i));
    for (std::size_t e = 0; e < pieces.size(); ++e) row.add(off[e] + idx, 1.0);
    joint.equalities.emplace_back(std::move(row), x(static_cast<Eigen::Index>(i - 1)));
  }

  UnionHullVerdict v;
  v.order = k;
  Solution sol = solve(joint, s);
  v.detail = sol.message;
  switch (sol.status) {
    case SolveStatus::optimal:
    case SolveStatus::inaccurate:
      if (check_solution(joint, sol.y, s).pass) {
        v.decision = Decision::member;
        for (std::size_t e = 0; e < pieces.size(); ++e)
          v.weights.push_back(sol.y(static_cast<Eigen::Index>(off[e] + x0_idx)));
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

bool union_stabilized(const std::vector<HomogenizedSystem>& pieces, int k,
                      const SolverSettings& s) {
  if (pieces.empty()) return true;
  for (const auto& piece : pieces) {
    for (const auto& c : probe_directions(piece.base.nvars())) {
      SupportResult a = support_value(piece, k, c, s);
      SupportResult b = support_value(piece, k + 1, c, s);
      if (a.status == SupportResult::Status::undetermined ||
          b.status == SupportResult::Status::undetermined)
        return false;
      if ((a.status == SupportResult::Status::unbounded) !=
          (b.status == SupportResult::Status::unbounded))
        return false;
      if (a.status == SupportResult::Status::unbounded) continue;
      if (std::abs(a.value - b.value) > kStabilizeTol * std::max(1.0, std::abs(a.value)))
        return false;
    }
  }
  return true;
}

}  // namespace conehull
