#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "conehull/basis.hpp"
#include "conehull/poly.hpp"

using namespace conehull;

namespace {

const std::vector<std::string> kXYZ{"x0", "x1", "x2"};

Polynomial random_poly(std::mt19937_64& rng, const std::vector<std::string>& vars, int max_deg,
                       int terms) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  Polynomial p(vars);
  for (int t = 0; t < terms; ++t) {
    Monomial m = Monomial::one(vars.size());
    int budget = deg(rng);
    for (int d = 0; d < budget; ++d) m.exps[static_cast<std::size_t>(rng() % vars.size())] += 1;
    p.set_coeff(m, p.coeff(m) + coeff(rng));
  }
  return p;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = u(rng);
  return y;
}

}  // namespace

TEST_CASE("basis enumeration is graded-lex with binomial size") {
  auto b = enumerate_basis(3, 1);
  REQUIRE(b.size() == 4);
  CHECK(b[0] == Monomial::one(3));
  CHECK(b[1] == Monomial::var(3, 0));
  CHECK(b[2] == Monomial::var(3, 1));
  CHECK(b[3] == Monomial::var(3, 2));

  CHECK(enumerate_basis(3, 2).size() == 10);
  CHECK(enumerate_basis(2, 3).size() == 10);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    std::size_t nv = 1 + rng() % 5;
    int k = static_cast<int>(rng() % 7);
    auto basis = enumerate_basis(nv, k);
    CHECK(basis.size() == binomial(nv + static_cast<std::uint64_t>(k), nv));
    CHECK(std::is_sorted(basis.begin(), basis.end(), grlex_less));
  }
}

TEST_CASE("layout indexes every monomial up to degree 2k") {
  auto layout = make_layout(3, 2);
  CHECK(layout.basis.size() == 10);
  CHECK(layout.dim() == enumerate_basis(3, 4).size());
  for (std::size_t i = 0; i < layout.monomials.size(); ++i)
    CHECK(layout.index_of(layout.monomials[i]) == i);
}

TEST_CASE("moment template is the Hankel structure") {
  auto layout1 = make_layout(1, 1);
  auto t = moment_template(layout1);
  REQUIRE(t.size == 2);
  Eigen::VectorXd y(3);
  y << 2.0, 3.0, 5.0;  // moments of 1, x, x^2
  Eigen::MatrixXd m = instantiate(t, y);
  CHECK(m(0, 0) == doctest::Approx(2.0));
  CHECK(m(0, 1) == doctest::Approx(3.0));
  CHECK(m(1, 0) == doctest::Approx(3.0));
  CHECK(m(1, 1) == doctest::Approx(5.0));

  // the (x0, x1) entry selects the moment of x0*x1
  auto layout = make_layout(3, 1);
  auto mt = moment_template(layout);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.dim()));
  e[static_cast<Eigen::Index>(layout.index_of(Monomial::var(3, 0) * Monomial::var(3, 1)))] = 1.0;
  Eigen::MatrixXd sel = instantiate(mt, e);
  CHECK(sel(1, 2) == doctest::Approx(1.0));
  CHECK(sel(2, 1) == doctest::Approx(1.0));
  CHECK(sel(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("instantiated templates are exactly symmetric") {
  std::mt19937_64 rng(5);
  auto layout = make_layout(2, 3);
  auto t = moment_template(layout);
  Eigen::MatrixXd m = instantiate(t, random_vector(rng, static_cast<Eigen::Index>(layout.dim())));
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("localizing template worked forms") {
  auto layout = make_layout(3, 1);

  auto by_one = localizing_template(layout, Polynomial::constant(kXYZ, 1.0));
  auto plain = moment_template(layout);
  REQUIRE(by_one.size == plain.size);
  std::mt19937_64 rng(9);
  Eigen::VectorXd y = random_vector(rng, static_cast<Eigen::Index>(layout.dim()));
  CHECK((instantiate(by_one, y) - instantiate(plain, y)).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));

  auto by_x0 = localizing_template(layout, Polynomial::variable(kXYZ, 0));
  REQUIRE(by_x0.size == 1);
  Eigen::MatrixXd v = instantiate(by_x0, y);
  CHECK(v(0, 0) == doctest::Approx(y[static_cast<Eigen::Index>(layout.index_of(Monomial::var(3, 0)))]));

  auto sphere = Polynomial::parse("x0^2 + x1^2 + x2^2 - 1", kXYZ);
  auto by_sphere = localizing_template(layout, sphere);
  REQUIRE(by_sphere.size == 1);
  double expect = y[static_cast<Eigen::Index>(layout.index_of(Monomial::var(3, 0) * Monomial::var(3, 0)))] +
                  y[static_cast<Eigen::Index>(layout.index_of(Monomial::var(3, 1) * Monomial::var(3, 1)))] +
                  y[static_cast<Eigen::Index>(layout.index_of(Monomial::var(3, 2) * Monomial::var(3, 2)))] -
                  y[static_cast<Eigen::Index>(layout.index_of(Monomial::one(3)))];
  CHECK(instantiate(by_sphere, y)(0, 0) == doctest::Approx(expect));

  CHECK(localizing_order(layout, sphere) == 0);
  auto too_big = Polynomial::parse("x1^3", kXYZ);
  CHECK_THROWS_AS(localizing_template(layout, too_big), Error);
}

TEST_CASE("localizing matrix satisfies the shifted quadratic-form identity") {
  // q' M(p y) q == L_y(p q^2); the right side is recomputed with polynomial
  // arithmetic, independent of the template assembly
  std::mt19937_64 rng(101);
  int checked = 0;
  while (checked < 500) {
    std::size_t nv = 2 + rng() % 2;
    int k = 2 + static_cast<int>(rng() % 2);
    std::vector<std::string> vars(kXYZ.begin(), kXYZ.begin() + static_cast<long>(nv));
    auto layout = make_layout(nv, k);

    auto p = random_poly(rng, vars, 2, 4);
    if (p.is_zero()) continue;
    const int kp = localizing_order(layout, p);
    auto qbasis = enumerate_basis(nv, kp);

    Polynomial q(vars);
    std::uniform_real_distribution<double> coeff(-1.5, 1.5);
    for (const auto& m : qbasis) q.set_coeff(m, coeff(rng));

    Eigen::VectorXd y = random_vector(rng, static_cast<Eigen::Index>(layout.dim()));
    Eigen::VectorXd qv(static_cast<Eigen::Index>(qbasis.size()));
    for (std::size_t i = 0; i < qbasis.size(); ++i)
      qv[static_cast<Eigen::Index>(i)] = q.coeff(qbasis[i]);

    auto t = localizing_template(layout, p);
    REQUIRE(t.size == qbasis.size());
    const double lhs = qv.dot(instantiate(t, y) * qv);
    const double rhs = riesz_apply(layout, y, p * q * q);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    ++checked;
  }
}

TEST_CASE("point-mass moment matrix is PSD of rank one") {
  std::mt19937_64 rng(23);
  auto layout = make_layout(3, 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d pt(u(rng), u(rng), u(rng));
  Eigen::VectorXd y(static_cast<Eigen::Index>(layout.dim()));
  for (std::size_t i = 0; i < layout.monomials.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = layout.monomials[i].eval({pt[0], pt[1], pt[2]});
  Eigen::MatrixXd m = instantiate(moment_template(layout), y);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  int positive = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-9 * es.eigenvalues().maxCoeff()) ++positive;
  CHECK(positive == 1);
}

TEST_CASE("riesz functional application") {
  auto layout = make_layout(3, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.dim()));
  // y_a = u~^a / u~_0 with u~ = (1, u)/|(1, u)| recovers L(x0) = 1, L(x_i) = u_i
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<double> ut{s, s, s};
  for (std::size_t i = 0; i < layout.monomials.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = layout.monomials[i].eval(ut) / ut[0];
  CHECK(riesz_apply(layout, y, Polynomial::constant(kXYZ, 1.0)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(riesz_apply(layout, y, Polynomial::variable(kXYZ, 0)) == doctest::Approx(1.0));
  CHECK(riesz_apply(layout, y, Polynomial::variable(kXYZ, 1)) == doctest::Approx(1.0));

  auto f = riesz_functional(layout, Polynomial::parse("x0 - 2*x2", kXYZ));
  CHECK(f.apply(y) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(riesz_apply(layout, y, Polynomial::parse("x1^3", kXYZ)), Error);
}
