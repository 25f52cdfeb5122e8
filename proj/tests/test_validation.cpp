#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shapegrad/problems.hpp"
#include "shapegrad/validation.hpp"

using namespace shapegrad;

namespace {

const Box kHoldall{Vec2(-1.2, -1.2), Vec2(1.2, 1.2)};

VectorField field(const char* text, const Box& box = kHoldall) {
  return make_vector_field(CatalogSpec::parse(text), box);
}

ScalarFunction sf(const char* text) { return make_scalar_function(CatalogSpec::parse(text)); }

RobinData constant_robin() {
  RobinData d;
  d.M << 2.0, 0.3, 0.3, 1.0;
  d.beta = sf("constant 1");
  d.g = sf("constant 1");
  return d;
}

RobinData nontrivial_robin() {
  RobinData d;
  d.M << 2.0, 0.0, 0.0, 1.0;
  d.f = sf("constant 1");
  return d;
}

}  // namespace

TEST_CASE("estimate_order: exact quadratic decay") {
  CHECK(estimate_order({{0.1, 1e-2}, {0.05, 2.5e-3}, {0.025, 6.25e-4}}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("estimate_order: constant errors give zero") {
  CHECK(std::abs(estimate_order({{0.1, 3e-4}, {0.05, 3e-4}, {0.025, 3e-4}})) <= 1e-12);
}

TEST_CASE("estimate_order: noisy first-order data") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<std::pair<double, double>> rows;
  for (double h = 0.2; h > 1e-3; h *= 0.5) rows.emplace_back(h, 0.3 * h * (1.0 + noise(rng)));
  CHECK(std::abs(estimate_order(rows) - 1.0) <= 0.1);
}

TEST_CASE("estimate_order: rejects short or non-positive input") {
  CHECK_THROWS_AS(estimate_order({{0.1, 1e-2}, {0.05, 2.5e-3}}), InvalidInput);
  CHECK_THROWS_AS(estimate_order({{0.1, 1e-2}, {0.05, 0.0}, {0.025, 1e-4}}), InvalidInput);
  CHECK_THROWS_AS(estimate_order({{-0.1, 1e-2}, {0.05, 1e-3}, {0.025, 1e-4}}), InvalidInput);
}

TEST_CASE("richardson removes even powers") {
  auto f = [](double h) { return 3.0 + 0.7 * h * h - 0.2 * std::pow(h, 4); };
  const double v = richardson({{0.2, f(0.2)}, {0.1, f(0.1)}, {0.05, f(0.05)}}, 2);
  CHECK(std::abs(v - 3.0) <= 1e-13);
}

TEST_CASE("settings validation") {
  ValidationSettings s;
  CHECK_NOTHROW(s.validate());
  s.s_list = {0.01, 0.02};
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s.s_list = {0.02, -0.01};
  CHECK_THROWS_AS(s.validate(), InvalidInput);
  s = ValidationSettings{};
  s.steps = 0;
  CHECK_THROWS_AS(s.validate(), InvalidInput);
}

TEST_CASE("area: central quotients converge at second order") {
  const AreaProblem area(gen_disk(Vec2(0, 0), 1.0, 5));
  const VectorField theta = field("tensor_bump 0.2 -0.1 0.9 0.8 0.5 -0.3");
  ValidationSettings s;
  s.extrapolated_tol = 1e-10;
  const FdTable t = fd_shape_check(area, theta, s);
  CHECK(t.pass);
  CHECK(t.observed_order() >= 1.9);
  CHECK(t.extrapolated_gap <= 1e-10);
  CHECK(std::abs(t.dJ - *area.raw_derivative(theta, s.velocity)) <= 1e-12);
}

TEST_CASE("area: parallel rows match serial rows bit for bit") {
  const AreaProblem area(gen_disk(Vec2(0, 0), 1.0, 3));
  const VectorField theta = field("bump 0.3 0.1 0.9 0.4 -0.3");
  ValidationSettings s;
  const FdTable serial = fd_shape_check(area, theta, s);
  s.threads = 4;
  const FdTable parallel = fd_shape_check(area, theta, s);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].j_plus == parallel.rows[i].j_plus);
    CHECK(serial.rows[i].j_minus == parallel.rows[i].j_minus);
  }
}

TEST_CASE("locality: a field supported away from the mesh changes nothing") {
  const Mesh disk = gen_disk(Vec2(0, 0), 1.0, 3);
  const Mesh mesh(disk.nodes(), disk.triangles(), disk.boundary(), Box{Vec2(-3, -3), Vec2(3, 3)});
  const RobinProblem robin(mesh, 1, nontrivial_robin());
  const VectorField far = field("bump 2.5 2.5 0.5 1 1", Box{Vec2(2, 2), Vec2(3, 3)});
  const ValidationSettings s;
  CHECK(robin.derivative(far, s.velocity).total() == 0.0);
  const FdTable t = fd_shape_check(robin, far, s);
  CHECK(t.pass);
  CHECK(t.exact);
  for (const auto& r : t.rows) {
    CHECK(r.j_plus == robin.cost());
    CHECK(r.j_minus == robin.cost());
  }
  const TaylorTable taylor = material_taylor_check(robin, far, s);
  for (const auto& r : taylor.rows) CHECK(r.remainder == 0.0);
  const DualityReport d = duality_check(robin, far, s.velocity);
  CHECK(d.lhs == 0.0);
  CHECK(d.rhs == 0.0);
}

TEST_CASE("zero field: every check is trivially exact") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const RobinProblem robin(mesh, 1, nontrivial_robin());
  const VectorField zero;
  const ValidationSettings s;
  const FdTable t = fd_shape_check(robin, zero, s);
  CHECK(t.pass);
  CHECK(t.dJ == 0.0);
  const TaylorTable taylor = material_taylor_check(robin, zero, s);
  CHECK(taylor.pass);
  for (const auto& r : taylor.rows) CHECK(r.remainder == 0.0);
  const DualityReport d = duality_check(robin, zero, s.velocity);
  CHECK(d.lhs == 0.0);
  CHECK(d.rhs == 0.0);
}

TEST_CASE("constant-state Robin: zero derivative and exact quotients") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const RobinProblem robin(mesh, 1, constant_robin());
  const VectorField theta = field("bump 0.3 0.1 0.9 0.4 -0.3");
  const ValidationSettings s;
  CHECK((robin.state()[0].array() - 1.0).abs().maxCoeff() <= 1e-10);
  CHECK(std::abs(robin.derivative(theta, s.velocity).total()) <= 1e-10);
  const FdTable t = fd_shape_check(robin, theta, s);
  CHECK(t.pass);
  for (const auto& r : t.rows) CHECK(r.central_error <= 1e-10);
  const TaylorTable taylor = material_taylor_check(robin, theta, s);
  for (const auto& r : taylor.rows) CHECK(r.remainder <= 1e-10);
}

TEST_CASE("Robin: FD, Taylor and duality checks pass") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 4);
  const RobinProblem robin(mesh, 1, nontrivial_robin());
  const VectorField theta = field("bump 0.3 0.1 0.9 0.4 -0.3");
  const ValidationSettings s;
  const FdTable t = fd_shape_check(robin, theta, s);
  CHECK(t.pass);
  CHECK(t.observed_order() >= 1.9);
  CHECK(t.relative_gap() <= 1e-5);
  const TaylorTable taylor = material_taylor_check(robin, theta, s);
  CHECK(taylor.pass);
  CHECK(duality_check(robin, theta, s.velocity).rel_gap() <= 1e-9);
  const auto dual = dual_form_check(robin, theta, s.velocity);
  REQUIRE(dual.has_value());
  CHECK(dual->gap() <= 1e-12);
}

TEST_CASE("tight tolerance on a loose s_list fails and flags rows") {
  const AreaProblem area(gen_disk(Vec2(0, 0), 1.0, 2));
  const VectorField theta = field("bump 0.3 0.1 0.9 0.4 -0.3");
  ValidationSettings s;
  s.s_list = {0.4, 0.3, 0.2};
  s.fd_rel_tol = 1e-12;
  const FdTable t = fd_shape_check(area, theta, s);
  CHECK_FALSE(t.pass);
  bool flagged = false;
  for (const auto& r : t.rows) flagged = flagged || !r.pass;
  CHECK(flagged);
}

TEST_CASE("default state hooks reject problems without a state") {
  const AreaProblem area(gen_disk(Vec2(0, 0), 1.0, 1));
  CHECK_FALSE(area.has_state());
  CHECK_THROWS_AS(area.state(), InvalidInput);
  CHECK_THROWS_AS(area.adjoint(), InvalidInput);
}
