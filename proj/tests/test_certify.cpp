#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "conehull/certify.hpp"
#include "conehull/oracle.hpp"
#include "conehull/relax.hpp"

using namespace conehull;

namespace {

const std::vector<std::string> kXY{"x1", "x2"};
const std::vector<std::string> kXYZ{"x0", "x1", "x2"};

SemialgebraicSet cusp_set() {
  SemialgebraicSet s;
  s.vars = kXY;
  s.inequalities = {Polynomial::parse("x1", kXY), Polynomial::parse("x1^2 - x2^3", kXY)};
  return s;
}

SemialgebraicSet parabola_set() {
  SemialgebraicSet s;
  s.vars = kXY;
  s.inequalities = {Polynomial::parse("x2 - x1^2", kXY)};
  return s;
}

SemialgebraicSet notpointed_set() {
  SemialgebraicSet s;
  s.vars = kXY;
  s.inequalities = {Polynomial::parse("x2^3 - x1^2", kXY)};
  return s;
}

SemialgebraicSet bow_set() {
  SemialgebraicSet s;
  s.vars = kXY;
  s.equalities = {Polynomial::parse("x1^4 - x1^2*x2 + x2^3", kXY)};
  return s;
}

double min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("module membership of a generator is certified at the lowest order") {
  auto h = homogenize_system(cusp_set());
  auto c = qmodule_membership(Polynomial::parse("x0", kXYZ), h, 1);
  REQUIRE(c.outcome == CertOutcome::found);
  CHECK(c.residual <= 1e-6);
  CHECK(reconstruction_residual(c) <= 1e-6);
  // order 1 drops the cubic generator's block entirely
  REQUIRE(c.generators.size() == 3);
  CHECK(c.generators[0] == Polynomial::parse("1", kXYZ));
  CHECK(c.generators[1] == Polynomial::parse("x1", kXYZ));
  CHECK(c.generators[2] == Polynomial::parse("x0", kXYZ));
  for (const auto& g : c.gram_blocks) {
    CHECK(g.isApprox(g.transpose(), 1e-12));
    CHECK(min_eig(g) >= -1e-7);
  }
  // the identity rebuilt from the blocks reproduces the target coefficientwise
  auto rebuilt = reconstruct(c);
  auto diff = rebuilt - c.target;
  for (const auto& [m, coef] : diff.terms()) CHECK(std::abs(coef) <= 1e-6);
}

TEST_CASE("a supporting line of the homogenized cusp is certified at order 3") {
  auto h = homogenize_system(cusp_set());
  auto f = Polynomial::parse("x0 + 2*x1 - 3*x2", kXYZ);
  auto c = qmodule_membership(f, h, 3);
  REQUIRE(c.outcome == CertOutcome::found);
  CHECK(c.residual <= 1e-6);
  CHECK(c.order == 3);
  CHECK(c.generators.size() == 4);
  // scaling the target rescales the certificate, never the outcome
  auto scaled = qmodule_membership(f.scaled(2.5), h, 3);
  CHECK(scaled.outcome == CertOutcome::found);
  CHECK(scaled.residual <= 1e-6);
}

TEST_CASE("globally negative targets are refuted at every tried order") {
  auto h = homogenize_system(cusp_set());
  auto f = Polynomial::parse("-x0", kXYZ);
  for (int k = 1; k <= 3; ++k) {
    auto c = qmodule_membership(f, h, k);
    CHECK(c.outcome == CertOutcome::not_found);
    CHECK(c.order == k);
    auto scaled = qmodule_membership(f.scaled(2.5), h, k);
    CHECK(scaled.outcome == CertOutcome::not_found);
  }
}

TEST_CASE("the base-set overload works on raw generators") {
  auto cusp = cusp_set();
  auto c = qmodule_membership(Polynomial::parse("1 + x1", kXY), cusp, 1);
  REQUIRE(c.outcome == CertOutcome::found);
  CHECK(c.residual <= 1e-6);
  CHECK_THROWS_AS(qmodule_membership(Polynomial::parse("x0", kXYZ), cusp, 1), Error);
}

TEST_CASE("corrupting a Gram block shows up in the rebuilt identity") {
  auto h = homogenize_system(cusp_set());
  auto c = qmodule_membership(Polynomial::parse("x0", kXYZ), h, 2);
  REQUIRE(c.outcome == CertOutcome::found);
  c.gram_blocks[0](0, 0) += 0.5;
  CHECK(reconstruction_residual(c) >= 0.4);
}

TEST_CASE("pointedness of the cusp cone is certified at order 2") {
  auto cusp = cusp_set();
  auto h = homogenize_system(cusp);
  auto pc = pointedness_certificate(h, 2);
  REQUIRE(pc.outcome == CertOutcome::found);
  CHECK(pc.margin > 0.0);
  CHECK(pc.order == 2);
  REQUIRE(pc.certificate.has_value());
  CHECK(reconstruction_residual(*pc.certificate) <= 1e-6);
  if (pc.route == "squared") CHECK(pc.sign_certificate.has_value());

  // unit coefficient norm
  double nrm = 0.0;
  for (const auto& [m, coef] : pc.ell.terms()) nrm += coef * coef;
  CHECK(std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-9));

  // the certified form stays above the margin on spherical cone points
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t accepted = 0;
  while (accepted < 500) {
    std::vector<double> p{gauss(rng), gauss(rng), gauss(rng)};
    double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    if (n < 1e-6) continue;
    for (auto& v : p) v /= n;
    if (p[0] < 0.0)
      for (auto& v : p) v = -v;
    bool inside = true;
    for (const auto& g : h.generators)
      if (g.eval(p) < 0.0) inside = false;
    if (!inside) continue;
    ++accepted;
    CHECK(pc.ell.eval(p) >= pc.margin - 1e-6);
  }

  // mapped samples of the base set land in the cone slice as well
  auto cloud = sample_set(cusp, {{0.0, 4.0}, {-4.0, 2.0}}, 100, 11);
  for (const auto& u : cloud.points) {
    double n = std::sqrt(1.0 + u.squaredNorm());
    CHECK(pc.ell.eval({1.0 / n, u[0] / n, u[1] / n}) >= pc.margin - 1e-6);
  }
}

TEST_CASE("pointedness certificates persist at higher orders") {
  auto hc = homogenize_system(cusp_set());
  CHECK(pointedness_certificate(hc, 3).outcome == CertOutcome::found);
  auto hp = homogenize_system(parabola_set());
  auto p2 = pointedness_certificate(hp, 2);
  REQUIRE(p2.outcome == CertOutcome::found);
  CHECK(p2.margin > 0.5);
  CHECK(pointedness_certificate(hp, 3).outcome == CertOutcome::found);
}

TEST_CASE("a cone containing a line is never certified pointed") {
  auto h = homogenize_system(notpointed_set());
  for (int k = 1; k <= 3; ++k) {
    auto pc = pointedness_certificate(h, k);
    CHECK(pc.outcome == CertOutcome::not_found);
    CHECK(pc.margin == 0.0);
  }
}

TEST_CASE("even degrees of every inequality flag a blind description") {
  CHECK(even_degree_obstruction(parabola_set()));
  CHECK(even_degree_obstruction(bow_set()));
  CHECK_FALSE(even_degree_obstruction(cusp_set()));
  CHECK_FALSE(even_degree_obstruction(notpointed_set()));
}

TEST_CASE("closedness screening recommends a repairing affine generator") {
  auto par = parabola_set();
  auto hp = homogenize_system(par);
  auto rp = closedness_report(par, hp, 2);
  CHECK(rp.structural_obstruction);
  CHECK(rp.noncompact_evidence);
  REQUIRE(rp.recommendation.has_value());
  CHECK(*rp.recommendation == Polynomial::parse("1 + x2", kXY));

  auto bow = bow_set();
  auto hb = homogenize_system(bow);
  auto rb = closedness_report(bow, hb, 3);
  CHECK(rb.structural_obstruction);
  REQUIRE(rb.recommendation.has_value());
  CHECK(*rb.recommendation == Polynomial::parse("1 - x2", kXY));

  auto cusp = cusp_set();
  auto hc = homogenize_system(cusp);
  auto rc = closedness_report(cusp, hc, 2);
  CHECK_FALSE(rc.structural_obstruction);
  CHECK_FALSE(rc.recommendation.has_value());
}

TEST_CASE("augmentation validates the new generator against samples") {
  auto par = parabola_set();
  std::vector<std::array<double, 2>> box{{-2.0, 2.0}, {-1.0, 4.0}};
  auto aug = augment_generators(par, Polynomial::parse("1 + x2", kXY), box);
  REQUIRE(aug.inequalities.size() == 2);
  CHECK(aug.inequalities[1] == Polynomial::parse("1 + x2", kXY));
  CHECK(par.inequalities.size() == 1);

  auto bow = bow_set();
  std::vector<std::array<double, 2>> bbox{{-2.0, 2.0}, {-6.0, 1.0}};
  auto baug = augment_generators(bow, Polynomial::parse("1 - x2", kXY), bbox);
  CHECK(baug.inequalities.size() == 1);

  auto cusp = cusp_set();
  std::vector<std::array<double, 2>> cbox{{0.0, 4.0}, {-4.0, 2.0}};
  auto caug = augment_generators(cusp, Polynomial::parse("1", kXY), cbox);
  CHECK(caug.inequalities.size() == 3);

  CHECK_THROWS_AS(augment_generators(par, Polynomial::parse("x2 - x1^2", kXY), box), Error);
  CHECK_THROWS_AS(augment_generators(par, Polynomial::parse("-1 - x2", kXY), box), Error);
  CHECK_THROWS_AS(augment_generators(par, Polynomial::parse("x0 + x1", kXYZ), box), Error);
}

TEST_CASE("augmentation changes the relaxation only below the set") {
  auto par = parabola_set();
  std::vector<std::array<double, 2>> box{{-2.0, 2.0}, {-1.0, 4.0}};
  auto aug = augment_generators(par, Polynomial::parse("1 + x2", kXY), box);
  auto ha = homogenize_system(aug);
  Eigen::VectorXd below(2);
  below << 0.0, -0.25;
  CHECK(is_member(ha, 2, below).decision == Decision::not_member);
  auto cloud = sample_set(par, box, 100, 3);
  for (const auto& u : cloud.points)
    CHECK(is_member(ha, 2, u).decision == Decision::member);
}
