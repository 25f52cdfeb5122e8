#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapegrad/fem.hpp"

using namespace shapegrad;

namespace {

constexpr double pi = std::numbers::pi;

Mesh reference_triangle() {
  return Mesh({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}}, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Poisson problem −Δu = f, u = 0 on ∂Ω, returns the L² error.
double poisson_error(int order, int n) {
  const Mesh m = gen_rectangle(0, 0, 1, 1, n, n);
  const FeSpace V(m, order);
  auto exact = [](const Vec2& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); };
  LinearSystem sys;
  sys.A = assemble_diffusion(V, [](const Vec2&) { return Mat2::Identity().eval(); });
  sys.b = assemble_load(V, [&](const Vec2& x) { return 2.0 * pi * pi * exact(x); });
  sys.symmetric = true;
  apply_dirichlet(sys, V, 1, [](const Vec2&) { return 0.0; });
  return l2_error(V, solve(sys), exact);
}

}  // namespace

TEST_CASE("quadrature rules integrate monomials exactly") {
  for (int deg : {0, 1, 2, 3, 4, 5, 6, 8}) {
    const auto rule = triangle_rule(deg);
    CHECK(rule.degree >= deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.points.size(); ++k)
          sum += rule.weights[k] * std::pow(rule.points[k](0), a) * std::pow(rule.points[k](1), b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        CHECK(std::abs(sum - exact) <= 1e-15);
      }
  }
  CHECK(triangle_rule(4).points.size() == 9);
  CHECK(triangle_rule(6).points.size() == 16);
  const auto e = edge_rule(kDefaultEdgeDegree);
  CHECK(e.points.size() == 3);
  for (int p = 0; p <= 5; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < e.points.size(); ++k) sum += e.weights[k] * std::pow(e.points[k], p);
    CHECK(std::abs(sum - 1.0 / (p + 1)) <= 1e-15);
  }
}

TEST_CASE("reference element stiffness matrix") {
  const FeSpace V(reference_triangle(), 1);
  const SparseMatrix K = assemble_diffusion(V, [](const Vec2&) { return Mat2::Identity().eval(); });
  // ∇λ₀ = (−1,−1), ∇λ₁ = (1,0), ∇λ₂ = (0,1), area ½.
  Eigen::Matrix3d expected;
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((Eigen::Matrix3d(K) - expected).cwiseAbs().maxCoeff() <= 1e-14);

  const SparseMatrix K2 = assemble_diffusion(V, [](const Vec2&) { return Mat2(2.0 * Mat2::Identity()); });
  CHECK((Eigen::Matrix3d(K2) - 2.0 * Eigen::Matrix3d(K)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stiffness annihilates constants") {
  for (int order : {1, 2}) {
    const FeSpace V(gen_disk(Vec2(0, 0), 1.0, 2), order);
    Mat2 M;
    M << 2.0, 0.3, 0.3, 1.0;
    const SparseMatrix K = assemble_diffusion(V, [&](const Vec2&) { return M; });
    CHECK((K * Vector::Ones(V.dof_count())).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((SparseMatrix(K.transpose()) - K).norm() <= 1e-14);
  }
}

TEST_CASE("mass matrices and loads") {
  for (int order : {1, 2}) {
    const FeSpace V(gen_rectangle(0, 0, 1, 1, 3, 3), order);
    const Vector one = Vector::Ones(V.dof_count());
    const SparseMatrix M = assemble_mass(V, [](const Vec2&) { return 1.0; });
    CHECK(std::abs(one.dot(M * one) - 1.0) <= 1e-12);
    const SparseMatrix B = assemble_boundary_mass(V, 1, [](const Vec2&) { return 1.0; });
    CHECK(std::abs(one.dot(B * one) - 4.0) <= 1e-12);
    CHECK(assemble_mass(V, [](const Vec2&) { return 0.0; }).norm() == 0.0);
    CHECK_THROWS_AS(assemble_boundary_mass(V, 7, [](const Vec2&) { return 1.0; }), InvalidInput);

    CHECK(std::abs(assemble_load(V, [](const Vec2&) { return 1.0; }).sum() - 1.0) <= 1e-12);
    CHECK(assemble_load(V, [](const Vec2&) { return 0.0; }).isZero(0.0));
    CHECK(std::abs(assemble_load(V, [](const Vec2& x) { return x(0); }).sum() - 0.5) <= 1e-12);
    CHECK(std::abs(assemble_boundary_load(V, 1, [](const Vec2& x) { return x(1); }).sum() - 2.0) <= 1e-12);
    // Row sums of the unit mass equal ∫φ_i.
    const Vector rows = M * one;
    CHECK((rows - assemble_load(V, [](const Vec2&) { return 1.0; })).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("Dirichlet elimination") {
  const FeSpace V(gen_disk(Vec2(0, 0), 1.0, 3), 1);
  LinearSystem sys;
  sys.A = assemble_diffusion(V, [](const Vec2&) { return Mat2::Identity().eval(); });
  sys.b = Vector::Zero(V.dof_count());
  sys.symmetric = true;
  SUBCASE("homogeneous values give zero") {
    apply_dirichlet(sys, V, 1, [](const Vec2&) { return 0.0; });
    CHECK(solve(sys).isZero(0.0));
  }
  SUBCASE("patch test reproduces a linear function") {
    auto lin = [](const Vec2& x) { return 1.0 + 2.0 * x(0) - 0.5 * x(1); };
    apply_dirichlet(sys, V, 1, lin);
    const Vector u = solve(sys);
    CHECK((u - interpolate(V, lin)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("idempotent and symmetric") {
    auto g = [](const Vec2& x) { return x(0) * x(1); };
    apply_dirichlet(sys, V, 1, g);
    const SparseMatrix A1 = sys.A;
    const Vector b1 = sys.b;
    apply_dirichlet(sys, V, 1, g);
    CHECK((sys.A - A1).norm() == 0.0);
    CHECK((sys.b - b1).norm() == 0.0);
    CHECK((SparseMatrix(sys.A.transpose()) - sys.A).norm() == 0.0);
  }
}

TEST_CASE("solver") {
  SparseMatrix I(5, 5);
  I.setIdentity();
  Vector b(5);
  b << 1, 2, 3, 4, 5;
  CHECK(solve(I, b, true) == b);
  CHECK(solve(I, b, false) == b);

  SparseMatrix Z(3, 3);
  Z.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(solve(Z, Vector::Ones(3), true), SingularSystem);

  // Fully constrained system returns the prescribed values.
  const FeSpace V(gen_rectangle(0, 0, 1, 1, 1, 1), 1);
  LinearSystem sys;
  sys.A = assemble_diffusion(V, [](const Vec2&) { return Mat2::Identity().eval(); });
  sys.b = Vector::Constant(V.dof_count(), 3.0);
  std::vector<int> all(V.dof_count());
  std::vector<double> vals(V.dof_count());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = static_cast<int>(i);
    vals[i] = 0.5 * i;
  }
  apply_dirichlet_dofs(sys, all, vals);
  const Vector u = solve(sys);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(u[i] == vals[i]);
}

TEST_CASE("diffusion plus mass with a manufactured solution") {
  // −div(M∇u) + u = f, natural boundary replaced by the exact Neumann data.
  Mat2 M;
  M << 2.0, 0.0, 0.0, 1.0;
  auto u = [](const Vec2& x) { return std::cos(pi * x(0)) * std::cos(pi * x(1)); };
  auto f = [&](const Vec2& x) { return (3.0 * pi * pi + 1.0) * u(x); };
  std::vector<double> errs;
  for (int n : {4, 8, 16}) {
    const FeSpace V(gen_rectangle(0, 0, 1, 1, n, n), 1);
    const SparseMatrix A = assemble_diffusion(V, [&](const Vec2&) { return M; }) +
                           assemble_mass(V, [](const Vec2&) { return 1.0; });
    // ∂u/∂n = 0 on the unit square for this u.
    errs.push_back(l2_error(V, solve(A, assemble_load(V, f), true), u));
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
  CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("Poisson convergence orders") {
  const double p1a = poisson_error(1, 4), p1b = poisson_error(1, 8), p1c = poisson_error(1, 16);
  CHECK(std::log2(p1a / p1b) >= 1.9);
  CHECK(std::log2(p1b / p1c) >= 1.9);
  const double p2a = poisson_error(2, 4), p2b = poisson_error(2, 8), p2c = poisson_error(2, 16);
  CHECK(std::log2(p2a / p2b) >= 2.9);
  CHECK(std::log2(p2b / p2c) >= 2.9);
}

TEST_CASE("interpolation and evaluation") {
  const Mesh m = gen_disk(Vec2(0, 0), 1.0, 2);
  auto lin = [](const Vec2& x) { return 0.3 - x(0) + 2.0 * x(1); };
  auto quad = [](const Vec2& x) { return 0.3 - x(0) + 2.0 * x(1) + x(0) * x(0) - 0.7 * x(0) * x(1) + 0.2 * x(1) * x(1); };
  auto quad_grad = [](const Vec2& x) { return Vec2(-1.0 + 2.0 * x(0) - 0.7 * x(1), 2.0 - 0.7 * x(0) + 0.4 * x(1)); };
  const FeSpace V1(m, 1), V2(m, 2);
  const Vector c1 = interpolate(V1, lin), c2 = interpolate(V2, quad);
  const std::array<double, 3> bary{0.2, 0.5, 0.3};
  for (std::size_t t = 0; t < m.num_triangles(); t += 7) {
    const ElementGeometry g = element_geometry(m, t);
    const Vec2 x = g.map(Vec2(bary[1], bary[2]));
    CHECK(std::abs(eval_field(V1, c1, t, bary) - lin(x)) <= 1e-14);
    CHECK(std::abs(eval_field(V2, c2, t, bary) - quad(x)) <= 1e-14);
    CHECK((eval_gradient(V2, c2, t, bary) - quad_grad(x)).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(eval_field(V1, c1, 0, {1.2, -0.1, -0.1}), InvalidInput);
  for (std::size_t i = 0; i < V2.dof_count(); ++i) CHECK(c2[i] == quad(V2.dof_coords()[i]));
  CHECK(V2.dof_count() == m.num_nodes() + m.edges().size());
  // Every boundary dof sits on the circle (vertices) or on a chord midpoint.
  for (int d : V2.boundary_dofs()) CHECK(V2.dof_coords()[d].norm() > 0.9);
}
