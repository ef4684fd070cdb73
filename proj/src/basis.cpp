#include "conehull/basis.hpp"

#include <algorithm>

namespace conehull {

void LinearFunctional::add(std::size_t idx, double c) {
  if (c == 0.0) return;
  auto it = std::lower_bound(terms.begin(), terms.end(), idx,
                             [](const auto& t, std::size_t v) { return t.first < v; });
  if (it != terms.end() && it->first == idx) {
    it->second += c;
    if (it->second == 0.0) terms.erase(it);
  } else {
    terms.insert(it, {idx, c});
  }
}

double LinearFunctional::apply(const Eigen::VectorXd& y) const {
  double v = 0.0;
  for (const auto& [i, c] : terms) v += c * y(static_cast<Eigen::Index>(i));
  return v;
}

std::size_t MatrixTemplate::tri_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  // row-major upper triangle
  return i * n - i * (i + 1) / 2 + j;
}

LinearFunctional& MatrixTemplate::at(std::size_t i, std::size_t j) {
  return entries[tri_index(size, i, j)];
}

const LinearFunctional& MatrixTemplate::at(std::size_t i, std::size_t j) const {
  return entries[tri_index(size, i, j)];
}

Eigen::MatrixXd instantiate(const MatrixTemplate& t, const Eigen::VectorXd& y) {
  Eigen::MatrixXd m(t.size, t.size);
  for (std::size_t i = 0; i < t.size; ++i)
    for (std::size_t j = i; j < t.size; ++j) {
      double v = t.at(i, j).apply(y);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
  return v;
}

namespace {

void enumerate_degree(std::size_t nvars, std::size_t var, int left, std::vector<int>& cur,
                      std::vector<Monomial>& out) {
  if (var + 1 == nvars) {
    cur[var] = left;
    out.emplace_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = left; e >= 0; --e) {
    cur[var] = e;
    enumerate_degree(nvars, var + 1, left - e, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<Monomial> enumerate_basis(std::size_t nvars, int max_deg) {
  if (nvars == 0) throw Error("basis needs at least one variable");
  if (max_deg < 0) throw Error("negative basis degree");
  std::vector<Monomial> out;
  out.reserve(binomial(nvars + max_deg, nvars));
  std::vector<int> cur(nvars, 0);
  for (int d = 0; d <= max_deg; ++d) enumerate_degree(nvars, 0, d, cur, out);
  return out;
}

MomentLayout make_layout(std::size_t nvars, int k) {
  if (k < 1) throw Error("relaxation order must be at least 1");
  MomentLayout l;
  l.nvars = nvars;
  l.k = k;
  l.basis = enumerate_basis(nvars, k);
  l.monomials = enumerate_basis(nvars, 2 * k);
  for (std::size_t i = 0; i < l.monomials.size(); ++i) l.index.emplace(l.monomials[i], i);
  return l;
}

std::size_t MomentLayout::index_of(const Monomial& m) const {
  auto it = index.find(m);
  if (it == index.end()) throw Error("monomial outside the degree-2k index space");
  return it->second;
}

MatrixTemplate moment_template(const MomentLayout& layout) {
  MatrixTemplate t(layout.basis.size());
  for (std::size_t i = 0; i < t.size; ++i)
    for (std::size_t j = i; j < t.size; ++j)
      t.at(i, j).add(layout.index_of(layout.basis[i] * layout.basis[j]), 1.0);
  return t;
}

int localizing_order(const MomentLayout& layout, const Polynomial& p) {
  int d = p.total_degree();
  return layout.k - (d + 1) / 2;
}

MatrixTemplate localizing_template(const MomentLayout& layout, const Polynomial& p) {
  if (p.is_zero()) throw Error("localizing polynomial must be nonzero");
  if (p.nvars() != layout.nvars) throw Error("localizing polynomial has wrong arity");
  int order = localizing_order(layout, p);
  if (order < 0) throw Error("relaxation order too small for generator of degree " +
                             std::to_string(p.total_degree()));
  // graded order makes the degree-<=order basis a prefix
  std::size_t n = 0;
  while (n < layout.basis.size() && layout.basis[n].degree() <= order) ++n;
  MatrixTemplate t(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Monomial ab = layout.basis[i] * layout.basis[j];
      for (const auto& [g, c] : p.terms()) t.at(i, j).add(layout.index_of(ab * g), c);
    }
  return t;
}

LinearFunctional riesz_functional(const MomentLayout& layout, const Polynomial& p) {
  LinearFunctional f;
  for (const auto& [m, c] : p.terms()) f.add(layout.index_of(m), c);
  return f;
}

double riesz_apply(const MomentLayout& layout, const Eigen::VectorXd& y, const Polynomial& p) {
  if (y.size() != static_cast<Eigen::Index>(layout.dim()))
    throw Error("pseudo-moment vector has wrong dimension");
  return riesz_functional(layout, p).apply(y);
}

}  // namespace conehull
