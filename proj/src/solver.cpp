#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "conehull/conic.hpp"

// Homogeneous self-dual embedding over a product of dense PSD blocks,
// Nesterov-Todd scaling, Mehrotra predictor-corrector, Schur-complement KKT
// solve with one round of iterative refinement. Infeasibility and
// unboundedness are only reported after the independent certificate checkers
// accept the candidate certificate.

namespace conehull {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStepDamp = 0.99;
constexpr double kReg = 1e-11;        // static KKT regularization
constexpr double kDivergedCost = 1e8;  // objective magnitude treated as divergence

inline Eigen::Index svec_dim(Eigen::Index p) { return p * (p + 1) / 2; }

VectorXd svec(const MatrixXd& m) {
  const Eigen::Index p = m.rows();
  VectorXd v(svec_dim(p));
  const double s2 = std::sqrt(2.0);
  Eigen::Index t = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i; j < p; ++j) v(t++) = (i == j) ? m(i, j) : s2 * 0.5 * (m(i, j) + m(j, i));
  return v;
}

struct BlockEntry {
  int i, j;  // i <= j
  double c;
};

// sparse per-column representation of one PSD block map y -> sum_j y_j B_j
struct BlockData {
  Eigen::Index p = 0;
  std::vector<std::vector<BlockEntry>> cols;
};

MatrixXd block_value(const BlockData& b, const VectorXd& x) {
  MatrixXd m = MatrixXd::Zero(b.p, b.p);
  for (std::size_t j = 0; j < b.cols.size(); ++j) {
    double xj = x(static_cast<Eigen::Index>(j));
    if (xj == 0.0) continue;
    for (const auto& e : b.cols[j]) {
      m(e.i, e.j) += e.c * xj;
      if (e.i != e.j) m(e.j, e.i) += e.c * xj;
    }
  }
  return m;
}

// factor L with L L^T = S; falls back to an eigenvalue square root
MatrixXd psd_factor(const MatrixXd& s) {
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  VectorXd ev = es.eigenvalues().cwiseMax(1e-300);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

struct Scaling {
  MatrixXd r, rt, rti;  // rti = r^{-T}
  VectorXd lambda;      // scaled point, diagonal
};

Scaling nt_scaling(const MatrixXd& s, const MatrixXd& z) {
  MatrixXd ls = psd_factor(s);
  MatrixXd lz = psd_factor(z);
  Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
  VectorXd sig = svd.singularValues().cwiseMax(1e-300);
  VectorXd isq = sig.cwiseSqrt().cwiseInverse();
  Scaling w;
  w.r = ls * svd.matrixV() * isq.asDiagonal();
  w.rti = lz * svd.matrixU() * isq.asDiagonal();
  w.rt = w.r.transpose();
  w.lambda = sig;
  return w;
}

// lambda o v and its inverse for diagonal lambda
MatrixXd jordan_solve(const VectorXd& lam, const MatrixXd& v) {
  MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) out(i, j) = v(i, j) * 2.0 / (lam(i) + lam(j));
  return out;
}

double min_eig(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// step bound: largest a with lambda + a*d >= 0, in the metric of lambda
double step_bound(const VectorXd& lam, const MatrixXd& d) {
  VectorXd il = lam.cwiseSqrt().cwiseInverse();
  MatrixXd scaled = il.asDiagonal() * d * il.asDiagonal();
  double m = min_eig(0.5 * (scaled + scaled.transpose()));
  return m >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / m;
}

struct Reduced {
  MatrixXd a;  // p x n, independent rows
  VectorXd b;
  std::vector<std::size_t> kept_src;  // row -> canonical index
};

}  // namespace

static Solution solve_impl(const ConicProblem& prob, const SolverSettings& set) {
  const Eigen::Index n = static_cast<Eigen::Index>(prob.num_y);
  if (n == 0) throw Error("conic problem has no variables");
  if (prob.num_y > set.max_y)
    throw Error("problem has " + std::to_string(prob.num_y) +
                " variables, over the max_y guard of " + std::to_string(set.max_y));

  auto canon = canonical_equalities(prob);
  Solution sol;

  // canonical rows as dense matrix, deduplicated
  std::vector<std::size_t> uniq;
  {
    std::vector<std::string> seen;
    for (std::size_t r = 0; r < canon.size(); ++r) {
      std::string key;
      key.reserve(canon[r].first.terms.size() * 16 + 8);
      auto put = [&key](const void* ptr, std::size_t len) {
        key.append(static_cast<const char*>(ptr), len);
      };
      for (const auto& [idx, c] : canon[r].first.terms) {
        put(&idx, sizeof(idx));
        put(&c, sizeof(c));
      }
      put(&canon[r].second, sizeof(double));
      bool dup = false;
      for (const auto& k : seen)
        if (k == key) {
          dup = true;
          break;
        }
      if (!dup) {
        seen.push_back(std::move(key));
        uniq.push_back(r);
      }
    }
  }
  MatrixXd araw(uniq.size(), n);
  VectorXd braw(uniq.size());
  araw.setZero();
  for (std::size_t r = 0; r < uniq.size(); ++r) {
    for (const auto& [idx, c] : canon[uniq[r]].first.terms)
      araw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx)) = c;
    braw(static_cast<Eigen::Index>(r)) = canon[uniq[r]].second;
  }

  // rank filter; contradictory dependent rows certify infeasibility outright
  Reduced red;
  if (uniq.size() > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(araw.transpose());
    qr.setThreshold(1e-12);
    Eigen::Index rank = qr.rank();
    std::vector<std::size_t> kept, dropped;
    const auto& perm = qr.colsPermutation().indices();
    std::vector<bool> is_kept(uniq.size(), false);
    for (Eigen::Index i = 0; i < rank; ++i) is_kept[static_cast<std::size_t>(perm(i))] = true;
    for (std::size_t r = 0; r < uniq.size(); ++r) (is_kept[r] ? kept : dropped).push_back(r);
    red.a.resize(static_cast<Eigen::Index>(kept.size()), n);
    red.b.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
      red.a.row(static_cast<Eigen::Index>(i)) = araw.row(static_cast<Eigen::Index>(kept[i]));
      red.b(static_cast<Eigen::Index>(i)) = braw(static_cast<Eigen::Index>(kept[i]));
      red.kept_src.push_back(uniq[kept[i]]);
    }
    if (!dropped.empty()) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(red.a.transpose());
      for (std::size_t d : dropped) {
        VectorXd lam = cod.solve(araw.row(static_cast<Eigen::Index>(d)).transpose());
        double gap = braw(static_cast<Eigen::Index>(d)) - lam.dot(red.b);
        double scale = std::max(1.0, braw.cwiseAbs().maxCoeff());
        if (std::abs(gap) > 1e-9 * scale) {
          InfeasibilityCertificate cert;
          cert.eq_multipliers.assign(canon.size(), 0.0);
          cert.eq_multipliers[uniq[d]] = 1.0 / gap;
          for (std::size_t i = 0; i < red.kept_src.size(); ++i)
            cert.eq_multipliers[red.kept_src[i]] -= lam(static_cast<Eigen::Index>(i)) / gap;
          for (const auto& blk : prob.psd_blocks)
            cert.block_multipliers.emplace_back(MatrixXd::Zero(blk.size, blk.size));
          sol.status = SolveStatus::infeasible;
          sol.infeasibility = cert;
          sol.message = "contradictory equality rows";
          if (!check_infeasibility(prob, cert, set)) {
            sol.status = SolveStatus::solver_failure;
            sol.message = "contradictory equality rows, certificate failed verification";
            sol.infeasibility.reset();
          }
          return sol;
        }
      }
    }
  }

  const Eigen::Index p = red.a.rows();
  VectorXd c = VectorXd::Zero(n);
  if (prob.objective)
    for (const auto& [idx, v] : prob.objective->terms) c(static_cast<Eigen::Index>(idx)) = v;

  // no PSD blocks: plain linear algebra on the affine set
  if (prob.psd_blocks.empty()) {
    VectorXd y0 = VectorXd::Zero(n);
    VectorXd crow = VectorXd::Zero(n);
    if (p > 0) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(red.a);
      y0 = cod.solve(red.b);
      if ((red.a * y0 - red.b).cwiseAbs().maxCoeff() >
          set.eq_tol * std::max(1.0, red.b.cwiseAbs().maxCoeff())) {
        sol.status = SolveStatus::solver_failure;
        sol.message = "equality system unsolved after rank filtering";
        return sol;
      }
      Eigen::HouseholderQR<MatrixXd> qr(red.a.transpose());
      MatrixXd q1 = qr.householderQ() * MatrixXd::Identity(n, p);
      crow = q1 * (q1.transpose() * c);
    }
    VectorXd cnull = c - crow;
    if (prob.objective && cnull.cwiseAbs().maxCoeff() > 1e-10) {
      UnboundedRay ray;
      ray.direction = -cnull;
      if (check_ray(prob, ray, set)) {
        sol.status = SolveStatus::unbounded;
        sol.ray = ray;
        sol.message = "objective unbounded on the affine set";
        return sol;
      }
    }
    sol.status = SolveStatus::optimal;
    sol.y = y0;
    sol.objective = c.dot(y0);
    sol.gap = 0.0;
    sol.message = "linear path";
    return sol;
  }

  // block data
  std::vector<BlockData> blocks;
  Eigen::Index svec_total = 0;
  double cone_deg = 0.0;
  for (const auto& t : prob.psd_blocks) {
    BlockData bd;
    bd.p = static_cast<Eigen::Index>(t.size);
    bd.cols.assign(prob.num_y, {});
    for (std::size_t i = 0; i < t.size; ++i)
      for (std::size_t j = i; j < t.size; ++j)
        for (const auto& [idx, coef] : t.at(i, j).terms)
          bd.cols[idx].push_back({static_cast<int>(i), static_cast<int>(j), coef});
    svec_total += svec_dim(bd.p);
    cone_deg += static_cast<double>(bd.p);
    blocks.push_back(std::move(bd));
  }
  const std::size_t nb = blocks.size();

  auto apply_gt = [&](const std::vector<MatrixXd>& zmats) {
    // G^T z with G = -B
    VectorXd out = VectorXd::Zero(n);
    for (std::size_t l = 0; l < nb; ++l)
      for (std::size_t j = 0; j < prob.num_y; ++j) {
        double acc = 0.0;
        for (const auto& e : blocks[l].cols[j])
          acc += e.c * (e.i == e.j ? zmats[l](e.i, e.i) : 2.0 * zmats[l](e.i, e.j));
        out(static_cast<Eigen::Index>(j)) -= acc;
      }
    return out;
  };

  // state
  VectorXd x = VectorXd::Zero(n), yv = VectorXd::Zero(p);
  std::vector<MatrixXd> smat_v(nb), zmat_v(nb);
  double tau = 1.0, kappa = 1.0;

  std::vector<Scaling> w(nb);
  std::vector<MatrixXd> gt(nb);  // scaled columns, svec_p x n
  Eigen::PartialPivLU<MatrixXd> kkt;

  auto set_identity_scaling = [&] {
    for (std::size_t l = 0; l < nb; ++l) {
      w[l].r = MatrixXd::Identity(blocks[l].p, blocks[l].p);
      w[l].rt = w[l].r;
      w[l].rti = w[l].r;
      w[l].lambda = VectorXd::Ones(blocks[l].p);
    }
  };

  auto build_scaled_columns = [&] {
    for (std::size_t l = 0; l < nb; ++l) {
      const auto& bd = blocks[l];
      gt[l].resize(svec_dim(bd.p), n);
      MatrixXd tmp(bd.p, bd.p);
      for (std::size_t j = 0; j < prob.num_y; ++j) {
        tmp.setZero();
        for (const auto& e : bd.cols[j]) {
          // rti' E_ab rti accumulated symmetrically
          tmp.noalias() += e.c * (w[l].rti.row(e.i).transpose() * w[l].rti.row(e.j));
          if (e.i != e.j)
            tmp.noalias() += e.c * (w[l].rti.row(e.j).transpose() * w[l].rti.row(e.i));
        }
        gt[l].col(static_cast<Eigen::Index>(j)) = -svec(0.5 * (tmp + tmp.transpose()));
      }
    }
  };

  auto factor_kkt = [&] {
    MatrixXd k = MatrixXd::Zero(n + p, n + p);
    MatrixXd h = MatrixXd::Zero(n, n);
    for (std::size_t l = 0; l < nb; ++l) h.selfadjointView<Eigen::Lower>().rankUpdate(gt[l].transpose());
    k.topLeftCorner(n, n) = MatrixXd(h.selfadjointView<Eigen::Lower>());
    k.topLeftCorner(n, n).diagonal().array() += kReg;
    if (p > 0) {
      k.topRightCorner(n, p) = red.a.transpose();
      k.bottomLeftCorner(p, n) = red.a;
      k.bottomRightCorner(p, p).diagonal().array() -= kReg;
    }
    kkt.compute(k);
  };

  struct Dir {
    VectorXd x, y;
    std::vector<MatrixXd> z;
  };

  auto solve3_once = [&](const VectorXd& bx, const VectorXd& by,
                         const std::vector<MatrixXd>& bz) {
    Dir d;
    VectorXd rhs(n + p);
    rhs.head(n) = bx;
    for (std::size_t l = 0; l < nb; ++l) {
      MatrixXd mid = w[l].rti.transpose() * bz[l] * w[l].rti;
      rhs.head(n).noalias() += gt[l].transpose() * svec(mid);
    }
    if (p > 0) rhs.tail(p) = by;
    VectorXd u = kkt.solve(rhs);
    d.x = u.head(n);
    d.y = p > 0 ? u.tail(p).eval() : VectorXd();
    d.z.resize(nb);
    for (std::size_t l = 0; l < nb; ++l) {
      MatrixXd t = -block_value(blocks[l], d.x) - bz[l];  // mat(G ux - bz)
      MatrixXd mid = w[l].rti.transpose() * t * w[l].rti;
      d.z[l] = w[l].rti * mid * w[l].rti.transpose();
      d.z[l] = 0.5 * (d.z[l] + d.z[l].transpose()).eval();
    }
    return d;
  };

  auto solve3 = [&](const VectorXd& bx, const VectorXd& by, const std::vector<MatrixXd>& bz) {
    Dir d = solve3_once(bx, by, bz);
    // one refinement round on the unscaled system
    VectorXd r1 =
        bx - ((p > 0 ? (red.a.transpose() * d.y).eval() : VectorXd::Zero(n)) + apply_gt(d.z));
    VectorXd r2 = p > 0 ? (by - red.a * d.x).eval() : VectorXd();
    std::vector<MatrixXd> r3(nb);
    for (std::size_t l = 0; l < nb; ++l) {
      MatrixXd ww = w[l].r * (w[l].rt * d.z[l] * w[l].r) * w[l].rt;  // W'W uz
      r3[l] = bz[l] - (-block_value(blocks[l], d.x) - ww);
    }
    Dir corr = solve3_once(r1, r2, r3);
    d.x += corr.x;
    if (p > 0) d.y += corr.y;
    for (std::size_t l = 0; l < nb; ++l) d.z[l] += corr.z[l];
    return d;
  };

  // initial point
  set_identity_scaling();
  build_scaled_columns();
  factor_kkt();
  {
    std::vector<MatrixXd> zeros(nb);
    for (std::size_t l = 0; l < nb; ++l) zeros[l] = MatrixXd::Zero(blocks[l].p, blocks[l].p);
    Dir dp = solve3(VectorXd::Zero(n), red.b, zeros);
    x = dp.x;
    for (std::size_t l = 0; l < nb; ++l) {
      smat_v[l] = block_value(blocks[l], x);  // -G x
      double m = min_eig(smat_v[l]);
      if (m < 1e-8) smat_v[l].diagonal().array() += 1.0 - m;
    }
    Dir dd = solve3(-c, VectorXd::Zero(p), zeros);
    yv = dd.y;
    for (std::size_t l = 0; l < nb; ++l) {
      zmat_v[l] = dd.z[l];
      double m = min_eig(zmat_v[l]);
      if (m < 1e-8) zmat_v[l].diagonal().array() += 1.0 - m;
    }
  }

  const double resx0 = std::max(1.0, c.norm());
  const double resy0 = std::max(1.0, red.b.norm());
  const double resz0 = 1.0;  // h = 0
  const double degree = cone_deg + 1.0;

  auto frob = [](const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
    double v = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) v += (a[l].array() * b[l].array()).sum();
    return v;
  };

  auto try_pinfeas = [&](double bty) -> bool {
    if (bty >= 0.0) return false;
    InfeasibilityCertificate cert;
    cert.eq_multipliers.assign(canon.size(), 0.0);
    for (std::size_t i = 0; i < red.kept_src.size(); ++i)
      cert.eq_multipliers[red.kept_src[i]] = yv(static_cast<Eigen::Index>(i)) / bty;
    for (std::size_t l = 0; l < nb; ++l) cert.block_multipliers.push_back(zmat_v[l] / (-bty));
    if (!check_infeasibility(prob, cert, set)) return false;
    sol.status = SolveStatus::infeasible;
    sol.infeasibility = std::move(cert);
    sol.message = "primal infeasibility certificate verified";
    return true;
  };

  auto try_dinfeas = [&](double ctx) -> bool {
    if (!prob.objective || ctx >= 0.0) return false;
    UnboundedRay ray;
    ray.direction = x / (-ctx);
    if (!check_ray(prob, ray, set)) return false;
    sol.status = SolveStatus::unbounded;
    sol.ray = std::move(ray);
    sol.message = "improving ray verified";
    return true;
  };

  double gapn = std::numeric_limits<double>::infinity();
  double pres = std::numeric_limits<double>::infinity();
  double dres = std::numeric_limits<double>::infinity();
  double relgap = std::numeric_limits<double>::infinity();
  double pcost = 0.0;
  double ctx = 0.0;
  double bty = 0.0;
  int stall = 0;
  const bool trace = std::getenv("CONEHULL_SOLVER_TRACE") != nullptr;

  // most converged iterate seen so far; terminal exits report from it
  struct Snapshot {
    bool set = false;
    double merit = std::numeric_limits<double>::infinity();
    VectorXd x, yv;
    std::vector<MatrixXd> smat, zmat;
    double tau = 1.0, kappa = 1.0;
    double pres = 0.0, dres = 0.0, gapn = 0.0, relgap = 0.0, pcost = 0.0, ctx = 0.0, bty = 0.0;
  } best;

  auto restore_best = [&]() {
    x = best.x;
    yv = best.yv;
    smat_v = best.smat;
    zmat_v = best.zmat;
    tau = best.tau;
    kappa = best.kappa;
    pres = best.pres;
    dres = best.dres;
    gapn = best.gapn;
    relgap = best.relgap;
    pcost = best.pcost;
    ctx = best.ctx;
    bty = best.bty;
  };

  auto finalize = [&](int iter, const std::string& fail_reason) {
    sol.iterations = iter;
    if (try_pinfeas(bty)) return sol;
    if (try_dinfeas(ctx)) return sol;
    sol.y = x / tau;
    sol.objective = pcost;
    sol.gap = gapn;
    bool feas = sol.y.allFinite() && check_solution(prob, sol.y, set).pass;
    if (feas && !prob.objective) {
      // feasibility problems only need a validated point
      sol.status = SolveStatus::optimal;
      sol.message = "validated feasible point";
    } else if (feas && (gapn <= 1e-6 || relgap <= 1e-6)) {
      sol.status = SolveStatus::optimal;
      sol.message = "converged to reduced accuracy";
    } else if (pres <= 1e-6 && dres <= 1e-6 && (gapn <= 1e-5 || relgap <= 1e-5)) {
      sol.status = SolveStatus::inaccurate;
      sol.message = "stopped short of target tolerances";
    } else {
      sol.status = SolveStatus::solver_failure;
      sol.message = fail_reason;
    }
    return sol;
  };

  for (int iter = 0; iter <= set.max_iters; ++iter) {
    bool finite = x.allFinite() && std::isfinite(tau) && std::isfinite(kappa) && tau > 0.0 &&
                  (p == 0 || yv.allFinite());
    for (std::size_t l = 0; finite && l < nb; ++l)
      finite = smat_v[l].allFinite() && zmat_v[l].allFinite();
    if (!finite) {
      if (!best.set) {
        sol.status = SolveStatus::solver_failure;
        sol.message = "iterate diverged";
        sol.iterations = iter;
        return sol;
      }
      restore_best();
      return finalize(iter, "iterate diverged");
    }

    // residuals
    VectorXd rx = c * tau + apply_gt(zmat_v);
    if (p > 0) rx += red.a.transpose() * yv;
    VectorXd ry = p > 0 ? (red.b * tau - red.a * x).eval() : VectorXd();
    std::vector<MatrixXd> rzm(nb);
    double rznorm2 = 0.0;
    for (std::size_t l = 0; l < nb; ++l) {
      rzm[l] = block_value(blocks[l], x) - smat_v[l];  // -Gx - s
      rznorm2 += rzm[l].squaredNorm();
    }
    ctx = c.dot(x);
    bty = p > 0 ? red.b.dot(yv) : 0.0;
    double rtau = -ctx - bty - kappa;
    double gap = frob(smat_v, zmat_v);
    double mu = (gap + tau * kappa) / degree;

    pres = std::max(p > 0 ? ry.norm() / resy0 : 0.0, std::sqrt(rznorm2) / resz0) / tau;
    dres = rx.norm() / (resx0 * tau);
    gapn = gap / (tau * tau);
    pcost = ctx / tau;
    double dcost = -bty / tau;
    relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0)
      relgap = gapn / (-pcost);
    else if (dcost > 0.0)
      relgap = gapn / dcost;

    if (trace)
      std::fprintf(stderr,
                   "it %3d mu %.3e pres %.3e dres %.3e gap %.3e tau %.3e kappa %.3e pcost %.6e\n",
                   iter, mu, pres, dres, gapn, tau, kappa, pcost);

    if (pres <= set.feastol && dres <= set.feastol &&
        (gapn <= set.abstol || relgap <= set.reltol)) {
      sol.status = SolveStatus::optimal;
      sol.y = x / tau;
      sol.objective = pcost;
      sol.gap = gapn;
      sol.iterations = iter;
      sol.message = "converged";
      if (!check_solution(prob, sol.y, set).pass) {
        sol.status = SolveStatus::inaccurate;
        sol.message = "converged but residual check failed";
      }
      return sol;
    }
    if (bty < 0.0) {
      double pinfres = (apply_gt(zmat_v) +
                        (p > 0 ? (red.a.transpose() * yv).eval() : VectorXd::Zero(n)))
                           .norm() /
                       (resx0 * (-bty));
      if (pinfres <= set.feastol && try_pinfeas(bty)) {
        sol.iterations = iter;
        return sol;
      }
    }
    if (prob.objective && ctx < 0.0) {
      double gxs = 0.0;
      for (std::size_t l = 0; l < nb; ++l)
        gxs += (smat_v[l] - block_value(blocks[l], x)).squaredNorm();  // Gx + s
      double dinfres =
          std::max(p > 0 ? (red.a * x).norm() / resy0 : 0.0, std::sqrt(gxs) / resz0) / (-ctx);
      if (dinfres <= set.feastol && try_dinfeas(ctx)) {
        sol.iterations = iter;
        return sol;
      }
    }
    // weakly unbounded problems admit no strict ray: the value diverges while
    // tau collapses and the rescaled iterate stays near-feasible
    if (prob.objective && pcost <= -kDivergedCost && tau <= 1e-6 && pres <= 1e-4) {
      sol.status = SolveStatus::unbounded;
      sol.iterations = iter;
      sol.objective = pcost;
      if (ctx < 0.0) {
        UnboundedRay ray;
        ray.direction = x / (-ctx);
        sol.ray = std::move(ray);
      }
      sol.message = "objective diverged at near-feasible iterates";
      return sol;
    }
    double merit = std::max({pres, dres, std::min(gapn, relgap)});
    if (std::isfinite(merit) && merit < best.merit) {
      best.set = true;
      best.merit = merit;
      best.x = x;
      best.yv = yv;
      best.smat = smat_v;
      best.zmat = zmat_v;
      best.tau = tau;
      best.kappa = kappa;
      best.pres = pres;
      best.dres = dres;
      best.gapn = gapn;
      best.relgap = relgap;
      best.pcost = pcost;
      best.ctx = ctx;
      best.bty = bty;
    }

    // once mu bottoms out, further steps only erode feasibility
    bool worsened = best.set && mu < 1e-10 && merit > 1e4 * best.merit;
    if (iter == set.max_iters || stall >= 2 || mu < 1e-30 || worsened) {
      sol.iterations = iter;
      // last-chance certificates at checker tolerance
      if (try_pinfeas(bty)) return sol;
      if (try_dinfeas(ctx)) return sol;
      std::string reason = stall >= 2 ? "step size collapsed" : "iteration limit reached";
      if (best.set && best.merit < merit) restore_best();
      return finalize(iter, reason);
    }

    // scaling and KKT factorization
    for (std::size_t l = 0; l < nb; ++l) w[l] = nt_scaling(smat_v[l], zmat_v[l]);
    build_scaled_columns();
    factor_kkt();

    std::vector<MatrixXd> zeros(nb);
    for (std::size_t l = 0; l < nb; ++l) zeros[l] = MatrixXd::Zero(blocks[l].p, blocks[l].p);
    Dir v = solve3(-c, red.b, zeros);
    double cv = c.dot(v.x) + (p > 0 ? red.b.dot(v.y) : 0.0);  // + h'vz with h = 0

    auto direction = [&](double eta, double sigma_mu, const std::vector<MatrixXd>* corr,
                         double corr_tk) {
      // ds = lambda o lambda + corr - sigma*mu*e ; dtk = tau*kappa + corr_tk - sigma*mu
      std::vector<MatrixXd> bz(nb);
      for (std::size_t l = 0; l < nb; ++l) {
        MatrixXd ds = MatrixXd::Zero(blocks[l].p, blocks[l].p);
        ds.diagonal() = w[l].lambda.array().square().matrix();
        if (corr) ds += (*corr)[l];
        ds.diagonal().array() -= sigma_mu;
        MatrixXd lsolve = jordan_solve(w[l].lambda, -ds);  // lambda o\ (-ds)
        // W^T applied: r U r'
        MatrixXd wts = w[l].r * lsolve * w[l].rt;
        bz[l] = (1.0 - eta) * rzm[l] - wts;
      }
      double dtk = tau * kappa + corr_tk - sigma_mu;
      Dir u = solve3((1.0 - eta) * (-rx), p > 0 ? ((1.0 - eta) * ry).eval() : VectorXd(), bz);
      double cu = c.dot(u.x) + (p > 0 ? red.b.dot(u.y) : 0.0);
      double dtau_num = -(1.0 - eta) * rtau + cu - dtk / tau;
      double dtau_den = kappa / tau - cv;
      double dtau = dtau_num / dtau_den;
      Dir d;
      d.x = u.x + dtau * v.x;
      if (p > 0) d.y = u.y + dtau * v.y;
      d.z.resize(nb);
      std::vector<MatrixXd> dsmat(nb);
      for (std::size_t l = 0; l < nb; ++l) {
        d.z[l] = u.z[l] + dtau * v.z[l];
        // Delta s = W^T( lambda o\ (-ds) - W dz )
        MatrixXd ds = MatrixXd::Zero(blocks[l].p, blocks[l].p);
        ds.diagonal() = w[l].lambda.array().square().matrix();
        if (corr) ds += (*corr)[l];
        ds.diagonal().array() -= sigma_mu;
        MatrixXd lsolve = jordan_solve(w[l].lambda, -ds);
        MatrixXd wdz = w[l].rt * d.z[l] * w[l].r;  // W dz = r' Z r
        dsmat[l] = w[l].r * (lsolve - wdz) * w[l].rt;
        dsmat[l] = 0.5 * (dsmat[l] + dsmat[l].transpose()).eval();
      }
      double dkappa = (-dtk - kappa * dtau) / tau;
      return std::tuple<Dir, std::vector<MatrixXd>, double, double>(std::move(d), std::move(dsmat),
                                                                    dtau, dkappa);
    };

    auto max_step = [&](const std::vector<MatrixXd>& dz, const std::vector<MatrixXd>& dsm,
                        double dtau, double dkappa) {
      double a = std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < nb; ++l) {
        MatrixXd dz_sc = w[l].rt * dz[l] * w[l].r;        // W dz
        MatrixXd ds_sc = w[l].rti.transpose() * dsm[l] * w[l].rti;  // W^{-T} ds
        a = std::min(a, step_bound(w[l].lambda, dz_sc));
        a = std::min(a, step_bound(w[l].lambda, ds_sc));
      }
      if (dtau < 0.0) a = std::min(a, -tau / dtau);
      if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    auto [daff, dsaff, dtau_aff, dkappa_aff] = direction(0.0, 0.0, nullptr, 0.0);
    double a_aff = std::min(1.0, max_step(daff.z, dsaff, dtau_aff, dkappa_aff));
    double sigma = std::pow(1.0 - a_aff, 3);
    sigma = std::min(std::max(sigma, 1e-8), 0.999);

    std::vector<MatrixXd> corr(nb);
    for (std::size_t l = 0; l < nb; ++l) {
      MatrixXd ds_sc = w[l].rti.transpose() * dsaff[l] * w[l].rti;
      MatrixXd dz_sc = w[l].rt * daff.z[l] * w[l].r;
      corr[l] = 0.5 * (ds_sc * dz_sc + dz_sc * ds_sc);
    }
    double corr_tk = dtau_aff * dkappa_aff;
    auto [d, dsm, dtau, dkappa] = direction(sigma, sigma * mu, &corr, corr_tk);
    double alpha = std::min(1.0, kStepDamp * max_step(d.z, dsm, dtau, dkappa));
    bool dir_finite = d.x.allFinite() && std::isfinite(dtau) && std::isfinite(dkappa) &&
                      (p == 0 || d.y.allFinite());
    for (std::size_t l = 0; dir_finite && l < nb; ++l)
      dir_finite = d.z[l].allFinite() && dsm[l].allFinite();
    if (!dir_finite || !(alpha > 1e-13)) {
      ++stall;
      continue;
    }
    stall = 0;

    x += alpha * d.x;
    if (p > 0) yv += alpha * d.y;
    for (std::size_t l = 0; l < nb; ++l) {
      zmat_v[l] += alpha * d.z[l];
      smat_v[l] += alpha * dsm[l];
      zmat_v[l] = 0.5 * (zmat_v[l] + zmat_v[l].transpose()).eval();
      smat_v[l] = 0.5 * (smat_v[l] + smat_v[l].transpose()).eval();
    }
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }

  sol.status = SolveStatus::solver_failure;
  sol.message = "unreachable";
  return sol;
}

namespace {
thread_local SolveCounters g_counters;
}

SolveCounters solve_counters() { return g_counters; }

void reset_solve_counters() { g_counters = {}; }

Solution solve(const ConicProblem& prob, const SolverSettings& set) {
  Solution sol = solve_impl(prob, set);
  ++g_counters.solves;
  g_counters.iterations += static_cast<std::uint64_t>(sol.iterations);
  return sol;
}

}  // namespace conehull
