#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>

#include "conehull/poly.hpp"

namespace conehull {

// Sparse row over a coordinate vector y: sum_i c_i * y_{idx_i}.
struct LinearFunctional {
  std::vector<std::pair<std::size_t, double>> terms;  // sorted by index, no zeros

  void add(std::size_t idx, double c);
  double apply(const Eigen::VectorXd& y) const;
  bool empty() const { return terms.empty(); }
};

// Symmetric matrix whose entries are linear functionals of y. Only the upper
// triangle is stored; (i,j) and (j,i) are the same functional by construction.
struct MatrixTemplate {
  std::size_t size = 0;
  std::vector<LinearFunctional> entries;  // row-major upper triangle

  explicit MatrixTemplate(std::size_t n = 0) : size(n), entries(n * (n + 1) / 2) {}
  static std::size_t tri_index(std::size_t n, std::size_t i, std::size_t j);
  LinearFunctional& at(std::size_t i, std::size_t j);
  const LinearFunctional& at(std::size_t i, std::size_t j) const;
};

Eigen::MatrixXd instantiate(const MatrixTemplate& t, const Eigen::VectorXd& y);

// Monomial index space for a pseudo-moment vector truncated at degree 2k,
// plus the degree-<=k basis indexing moment-matrix rows.
struct MomentLayout {
  std::size_t nvars = 0;
  int k = 0;
  std::vector<Monomial> basis;      // degree <= k, graded lex
  std::vector<Monomial> monomials;  // degree <= 2k, graded lex; y lives here
  std::map<Monomial, std::size_t, GrlexLess> index;

  std::size_t dim() const { return monomials.size(); }
  std::size_t index_of(const Monomial& m) const;
};

// All monomials of degree <= max_deg in graded lex order.
// Size is C(nvars + max_deg, nvars).
std::vector<Monomial> enumerate_basis(std::size_t nvars, int max_deg);

std::uint64_t binomial(std::uint64_t n, std::uint64_t r);

MomentLayout make_layout(std::size_t nvars, int k);

// M_k(y), entry (a,b) = y_{alpha_a + alpha_b}.
MatrixTemplate moment_template(const MomentLayout& layout);

// M_{k-ceil(deg p/2)}(p y), entry (a,b) = sum_g p_g y_{alpha_a+alpha_b+g}.
// Throws if the shifted order would be negative.
MatrixTemplate localizing_template(const MomentLayout& layout, const Polynomial& p);

int localizing_order(const MomentLayout& layout, const Polynomial& p);

// Riesz functional L_y(p) as a row over y. Degree of p must be <= 2k.
LinearFunctional riesz_functional(const MomentLayout& layout, const Polynomial& p);

double riesz_apply(const MomentLayout& layout, const Eigen::VectorXd& y, const Polynomial& p);

}  // namespace conehull
