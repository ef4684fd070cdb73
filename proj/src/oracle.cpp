#include "conehull/oracle.hpp"

#include <algorithm>
#include <random>

namespace conehull {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

double eval_magnitude(const Polynomial& p, const std::vector<double>& x) {
  double m = 1.0;
  for (const auto& [mono, c] : p.terms()) m += std::abs(c * mono.eval(x));
  return m;
}

}  // namespace

bool polish_onto_equalities(const SemialgebraicSet& s, Eigen::VectorXd& x) {
  if (s.equalities.empty()) return true;
  const Eigen::Index m = static_cast<Eigen::Index>(s.equalities.size());
  const Eigen::Index n = x.size();
  Eigen::VectorXd h(m);
  Eigen::MatrixXd jac(m, n);
  for (int iter = 0; iter < 60; ++iter) {
    auto xs = to_std(x);
    double scale = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      h(i) = s.equalities[static_cast<std::size_t>(i)].eval(xs);
      scale = std::max(scale, eval_magnitude(s.equalities[static_cast<std::size_t>(i)], xs));
    }
    if (h.cwiseAbs().maxCoeff() <= 1e-14 * scale) return true;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        jac(i, j) = s.equalities[static_cast<std::size_t>(i)]
                        .derivative(static_cast<std::size_t>(j))
                        .eval(xs);
    Eigen::VectorXd dx = jac.completeOrthogonalDecomposition().solve(-h);
    if (!dx.allFinite()) return false;
    x += dx;
    if (dx.cwiseAbs().maxCoeff() < 1e-16 * (1.0 + x.cwiseAbs().maxCoeff())) break;
  }
  auto xs = to_std(x);
  double scale = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    h(i) = s.equalities[static_cast<std::size_t>(i)].eval(xs);
    scale = std::max(scale, eval_magnitude(s.equalities[static_cast<std::size_t>(i)], xs));
  }
  return h.cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

SampleCloud sample_set(const SemialgebraicSet& s, const std::vector<std::array<double, 2>>& box,
                       std::size_t count, std::uint64_t seed) {
  const std::size_t n = s.vars.size();
  if (box.size() != n) throw Error("sampling box must give bounds for every variable");
  if (count == 0) throw Error("sample count must be at least 1");
  for (const auto& [lo, hi] : box)
    if (!(lo < hi)) throw Error("sampling box has an empty axis range");

  SampleCloud cloud;
  cloud.box = box;
  cloud.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t max_attempts = count * 2000 + 200000;
  Eigen::VectorXd x(static_cast<Eigen::Index>(n));
  for (std::size_t attempt = 0; attempt < max_attempts && cloud.points.size() < count;
       ++attempt) {
    for (std::size_t j = 0; j < n; ++j)
      x(static_cast<Eigen::Index>(j)) = box[j][0] + (box[j][1] - box[j][0]) * unit(rng);
    if (!s.equalities.empty() && !polish_onto_equalities(s, x)) continue;
    bool inside = true;
    for (std::size_t j = 0; j < n && inside; ++j)
      inside = x(static_cast<Eigen::Index>(j)) >= box[j][0] - 1e-12 &&
               x(static_cast<Eigen::Index>(j)) <= box[j][1] + 1e-12;
    if (!inside) continue;
    if (!s.contains(to_std(x), 1e-9)) continue;
    cloud.points.push_back(x);
  }
  if (cloud.points.empty()) throw Error("no feasible point found in the sampling box");
  cloud.truncated = cloud.points.size() < count;
  return cloud;
}

std::vector<Eigen::Vector2d> hull_2d(const std::vector<Eigen::Vector2d>& pts) {
  std::vector<Eigen::Vector2d> p = pts;
  std::sort(p.begin(), p.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end(),
                      [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a == b; }),
          p.end());
  const std::size_t n = p.size();
  if (n < 3) return p;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], p[i]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

NumericSupport support_numeric(const SampleCloud& cloud, const Eigen::VectorXd& c) {
  if (cloud.points.empty()) throw Error("support of an empty cloud");
  NumericSupport out;
  out.value = -std::numeric_limits<double>::infinity();
  for (const auto& p : cloud.points) {
    double v = c.dot(p);
    if (v > out.value) {
      out.value = v;
      out.argmax = p;
    }
  }
  for (std::size_t j = 0; j < cloud.box.size(); ++j) {
    double span = cloud.box[j][1] - cloud.box[j][0];
    double xj = out.argmax(static_cast<Eigen::Index>(j));
    if (xj - cloud.box[j][0] < 1e-2 * span || cloud.box[j][1] - xj < 1e-2 * span)
      out.box_saturated = true;
  }
  return out;
}

}  // namespace conehull
