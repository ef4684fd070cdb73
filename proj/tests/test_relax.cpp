#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "conehull/basis.hpp"
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

SemialgebraicSet parabola_set(bool augmented) {
  SemialgebraicSet s;
  s.vars = kXY;
  s.inequalities = {Polynomial::parse("x2 - x1^2", kXY)};
  if (augmented) s.inequalities.push_back(Polynomial::parse("1 + x2", kXY));
  return s;
}

SemialgebraicSet cubic_curve_set() {
  SemialgebraicSet s;
  s.vars = kXY;
  s.inequalities = {Polynomial::parse("x2", kXY)};
  s.equalities = {Polynomial::parse("x1^3 - x2^2 - x1 + 1", kXY)};
  return s;
}

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("homogenized systems carry the lifted generators") {
  auto h = homogenize_system(cusp_set());
  CHECK(h.vars == kXYZ);
  REQUIRE(h.generators.size() == 3);
  CHECK(h.generators[0] == Polynomial::parse("x1", kXYZ));
  CHECK(h.generators[1] == Polynomial::parse("x0*x1^2 - x2^3", kXYZ));
  CHECK(h.generators[2] == Polynomial::parse("x0", kXYZ));
  CHECK(h.generator_orders == std::vector<int>{1, 2, 1});
  REQUIRE(h.equality_generators.size() == 1);
  CHECK(h.equality_generators[0] == Polynomial::parse("x0^2 + x1^2 + x2^2 - 1", kXYZ));

  auto hp = homogenize_system(parabola_set(false));
  REQUIRE(hp.generators.size() == 2);
  CHECK(hp.generators[0] == Polynomial::parse("x0*x2 - x1^2", kXYZ));
  CHECK(hp.generators[1] == Polynomial::parse("x0", kXYZ));

  auto hc = homogenize_system(cubic_curve_set());
  REQUIRE(hc.generators.size() == 2);
  CHECK(hc.generators[0] == Polynomial::parse("x2", kXYZ));
  CHECK(hc.generators[1] == Polynomial::parse("x0", kXYZ));
  REQUIRE(hc.equality_generators.size() == 2);
  CHECK(hc.equality_generators[1] ==
        Polynomial::parse("x1^3 - x0*x2^2 - x0^2*x1 + x0^3", kXYZ));

  // restricting any lifted inequality to x0 = 1 gives back the base generator
  for (std::size_t j = 0; j + 1 < h.generators.size(); ++j)
    CHECK(h.generators[j].dehomogenize(0) == cusp_set().inequalities[j]);
}

TEST_CASE("membership problems have the documented shape") {
  auto h = homogenize_system(cusp_set());
  auto prob = build_membership_problem(h, 3, vec2(1.0, 1.0));
  CHECK(prob.num_y == make_layout(3, 3).dim());
  CHECK(prob.equalities.size() == 3);  // x0 pin plus one pin per coordinate
  REQUIRE(prob.zero_blocks.size() == 1);
  std::size_t flat = prob.zero_blocks[0].size * (prob.zero_blocks[0].size + 1) / 2;
  CHECK(canonical_equalities(prob).size() == 3 + flat);
  CHECK_THROWS_AS(build_membership_problem(h, 0, vec2(1.0, 1.0)), Error);
}

TEST_CASE("membership verdicts on the cusp") {
  auto h = homogenize_system(cusp_set());
  auto in = is_member(h, 3, vec2(1.0, 1.0));
  CHECK(in.decision == Decision::member);
  CHECK(in.witness.size() > 0);

  CHECK(is_member(h, 3, vec2(0.0, 1.0)).decision == Decision::not_member);
  CHECK(is_member(h, 3, vec2(-1.0, 0.0)).decision == Decision::not_member);
}

TEST_CASE("membership after augmentation excludes the gap under the parabola") {
  auto h = homogenize_system(parabola_set(true));
  CHECK(is_member(h, 2, vec2(0.0, -0.25)).decision == Decision::not_member);
  CHECK(is_member(h, 2, vec2(0.0, 0.5)).decision == Decision::member);
}

TEST_CASE("member witnesses average to members: the relaxation is convex") {
  auto h = homogenize_system(cusp_set());
  auto a = is_member(h, 2, vec2(1.0, 1.0));
  auto b = is_member(h, 2, vec2(4.0, -2.0));
  REQUIRE(a.decision == Decision::member);
  REQUIRE(b.decision == Decision::member);
  CHECK(is_member(h, 2, vec2(2.5, -0.5)).decision == Decision::member);
}

TEST_CASE("sampled points of the set are members at every order") {
  auto cusp = cusp_set();
  auto h = homogenize_system(cusp);
  auto cloud = sample_set(cusp, {{0.0, 4.0}, {-4.0, 2.0}}, 200, 5);
  for (const auto& p : cloud.points)
    CHECK(is_member(h, 2, p).decision == Decision::member);
  for (std::size_t i = 0; i < 10; ++i)
    for (int k = 1; k <= 4; ++k)
      CHECK(is_member(h, k, cloud.points[i * 17]).decision == Decision::member);
}

TEST_CASE("support values on the cusp match the tangent line") {
  auto h = homogenize_system(cusp_set());
  auto r2 = support_value(h, 2, vec2(-2.0, 3.0));
  auto r3 = support_value(h, 3, vec2(-2.0, 3.0));
  REQUIRE(r2.status == SupportResult::Status::ok);
  REQUIRE(r3.status == SupportResult::Status::ok);
  CHECK(r3.value >= 1.0 - 1e-6);
  CHECK(r3.value <= 1.15);
  CHECK(r3.value <= r2.value + 1e-6);
  // finite values expose a maximizer consistent with the objective
  CHECK(r3.direction.dot(r3.maximizer_proxy) == doctest::Approx(r3.value).epsilon(1e-6));

  auto left = support_value(h, 2, vec2(-1.0, 0.0));
  REQUIRE(left.status == SupportResult::Status::ok);
  CHECK(left.value >= -1e-7);
  CHECK(left.value <= 1e-5);
}

TEST_CASE("the unaugmented parabola relaxation is the whole plane") {
  auto h = homogenize_system(parabola_set(false));
  for (int k = 2; k <= 3; ++k) {
    auto r = support_value(h, k, vec2(0.0, -1.0));
    CHECK(r.status == SupportResult::Status::unbounded);
  }
  // the augmented description recovers the finite analytic support
  auto ha = homogenize_system(parabola_set(true));
  auto r = support_value(ha, 2, vec2(1.0, -1.0));
  REQUIRE(r.status == SupportResult::Status::ok);
  CHECK(r.value == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("support is monotone in the order") {
  auto h = homogenize_system(cusp_set());
  for (auto c : {vec2(-2.0, 3.0), vec2(-1.0, 2.0), vec2(-0.5, -1.0)}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 3; ++k) {
      auto r = support_value(h, k, c);
      if (r.status == SupportResult::Status::unbounded) {
        CHECK(std::isinf(prev));
        continue;
      }
      REQUIRE(r.status == SupportResult::Status::ok);
      CHECK(r.value <= prev + 1e-6);
      prev = r.value;
    }
  }
}

TEST_CASE("certified linear bounds dominate support values") {
  // if tau*x0 - sum c_i x_i has a module certificate, the relaxation's support
  // in direction c stays at or below tau
  auto h = homogenize_system(cusp_set());
  auto bound = Polynomial::parse("x0 + 2*x1 - 3*x2", kXYZ);
  auto cert = qmodule_membership(bound, h, 3);
  REQUIRE(cert.outcome == CertOutcome::found);
  auto r = support_value(h, 3, vec2(-2.0, 3.0));
  REQUIRE(r.status == SupportResult::Status::ok);
  CHECK(r.value <= 1.0 + 1e-6);
}

TEST_CASE("planar tracing sweeps ordered angles") {
  auto h = homogenize_system(cusp_set());
  auto rows = trace_support_2d(h, 3, 8);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].first > rows[i - 1].first);
  // theta = pi is the direction (-1, 0): support 0 at the cone tip
  CHECK(rows[4].first == doctest::Approx(3.14159265358979).epsilon(1e-12));
  REQUIRE(rows[4].second.status == SupportResult::Status::ok);
  CHECK(std::abs(rows[4].second.value) <= 1e-5);

  auto ha = homogenize_system(parabola_set(true));
  auto prows = trace_support_2d(ha, 2, 8);
  REQUIRE(prows[6].second.status == SupportResult::Status::ok);
  CHECK(std::abs(prows[6].second.value) <= 1e-5);
  CHECK(prows[2].second.status == SupportResult::Status::unbounded);
}

TEST_CASE("the plain relaxation misses the cusp but keeps sign facts") {
  auto cusp = cusp_set();
  for (int k : {1, 3}) {
    auto r = plain_support_value(cusp, k, vec2(-2.0, 3.0));
    CHECK(r.status == SupportResult::Status::unbounded);
  }
  auto left = plain_support_value(cusp, 2, vec2(-1.0, 0.0));
  REQUIRE(left.status == SupportResult::Status::ok);
  CHECK(std::abs(left.value) <= 1e-5);

  SemialgebraicSet disk;
  disk.vars = kXY;
  disk.inequalities = {Polynomial::parse("1 - x1^2 - x2^2", kXY)};
  auto edge = plain_support_value(disk, 1, vec2(1.0, 0.0));
  REQUIRE(edge.status == SupportResult::Status::ok);
  CHECK(edge.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("point-mass moments satisfy every constraint of the membership cone") {
  auto cusp = cusp_set();
  auto h = homogenize_system(cusp);
  auto layout = make_layout(3, 2);
  auto cloud = sample_set(cusp, {{0.0, 4.0}, {-4.0, 2.0}}, 5, 21);
  for (const auto& u : cloud.points) {
    Eigen::Vector3d ut(1.0, u[0], u[1]);
    ut.normalize();
    Eigen::VectorXd y(static_cast<Eigen::Index>(layout.dim()));
    for (std::size_t i = 0; i < layout.monomials.size(); ++i)
      y[static_cast<Eigen::Index>(i)] =
          layout.monomials[i].eval({ut[0], ut[1], ut[2]}) / ut[0];
    auto prob = build_membership_problem(h, 2, u);
    SolverSettings tight;
    tight.eq_tol = 1e-12;
    tight.psd_tol = 1e-12;
    auto report = check_solution(prob, y, tight);
    CHECK(report.pass);
  }
}
