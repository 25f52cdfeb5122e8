#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/LU>

#include "shapegrad/elliptic.hpp"

using namespace shapegrad;

namespace {

const Box kHoldall{Vec2(-1.2, -1.2), Vec2(1.2, 1.2)};

ScalarFunction sf(const char* text) { return make_scalar_function(CatalogSpec::parse(text)); }

VectorField crossing_field() {
  return make_vector_field(CatalogSpec::parse("bump 0.3 0.1 0.9 0.4 -0.3"), kHoldall);
}

RobinData robin_data() {
  RobinData d;
  d.M << 2.0, 0.3, 0.3, 1.0;
  d.beta = sf("affine 1 0.2 0.1");
  d.f = sf("gaussian 1 0.2 0 0.5");
  d.g = sf("affine 0.5 0.3 -0.2");
  return d;
}

QuasilinearData quasilinear_data() {
  QuasilinearData d;
  d.m = make_nonlinear_function(CatalogSpec::parse("m_algebraic 2 1"));
  d.f = make_nonlinear_function(CatalogSpec::parse("f_sinx 1 0.1"));
  d.g = sf("gaussian 3 0.1 0.2 0.4");
  d.ud = sf("quadratic 0.1 0.2 0 -0.3 0 0.1");
  return d;
}

// Central quotients at s and s/2 of J on transported meshes; returns the two
// errors against `exact`.
std::pair<double, double> fd_errors(const std::function<double(const Mesh&)>& cost, const Mesh& mesh,
                                    const VectorField& theta, double exact, double s) {
  auto quotient = [&](double h) {
    const double jp = cost(transport_mesh(mesh, theta, h));
    const double jm = cost(transport_mesh(mesh, theta.negated(), h));
    return (jp - jm) / (2.0 * h);
  };
  return {std::abs(quotient(s) - exact), std::abs(quotient(0.5 * s) - exact)};
}

// The P1/P2 field u as an analytic-looking function, by brute-force point location.
ScalarFunction as_function(const FeSpace& V, const Vector& u) {
  auto locate = [&V](const Vec2& x) {
    const Mesh& mesh = V.mesh();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangles()[t];
      const Vec2 a = mesh.nodes()[tri[0]];
      Mat2 E;
      E << mesh.nodes()[tri[1]] - a, mesh.nodes()[tri[2]] - a;
      const Vec2 l = E.inverse() * (x - a);
      if (l.minCoeff() >= -1e-12 && l.sum() <= 1 + 1e-12)
        return std::pair{t, std::array<double, 3>{1 - l.sum(), l(0), l(1)}};
    }
    throw std::runtime_error("point outside mesh");
  };
  ScalarFunction f;
  f.name = "fe";
  f.value = [&V, u, locate](const Vec2& x) {
    const auto [t, b] = locate(x);
    return eval_field(V, u, t, b);
  };
  f.grad = [&V, u, locate](const Vec2& x) {
    const auto [t, b] = locate(x);
    return eval_gradient(V, u, t, b);
  };
  f.hess = [](const Vec2&) { return Mat2::Zero().eval(); };
  f.grad_lap = [](const Vec2&) { return Vec2::Zero().eval(); };
  return f;
}

RobinData constant_state_robin() {
  RobinData d;
  d.beta = sf("constant 1");
  d.g = sf("constant 1");
  return d;
}

Vector random_interior(const FeSpace& V, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n;
  Vector v(V.dof_count());
  for (auto& c : v) c = n(gen);
  zero_masked(v, V.boundary_mask());
  return v;
}

}  // namespace

TEST_CASE("Robin: constant and zero states") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  const RobinData d = constant_state_robin();
  const Vector u = robin_solve(V, d);
  CHECK((u.array() - 1.0).abs().maxCoeff() <= 1e-10);
  const Vector p = robin_adjoint(V, d, u);
  CHECK(p.cwiseAbs().maxCoeff() <= 1e-12);
  const ThetaField th(mesh, crossing_field(), VelocityMode::analytic);
  CHECK(robin_material(V, d, u, th).cwiseAbs().maxCoeff() <= 1e-10);
  const ShapeTensors T = robin_shape_tensors(V, d, u, p);
  double m = 0.0;
  for (const auto& s : T.S0) m = std::max(m, s.norm());
  for (const auto& s : T.S1) m = std::max(m, s.norm());
  for (const auto& s : T.S0_gamma) m = std::max(m, s.norm());
  for (const auto& s : T.S1_gamma) m = std::max(m, s.norm());
  CHECK(m <= 1e-10);

  RobinData zero;
  zero.M << 2.0, 0.3, 0.3, 1.0;
  zero.beta = sf("affine 1 0.2 0.1");
  CHECK(robin_solve(V, zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Robin: zero source leaves no first-order volume term") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  RobinData d = robin_data();
  d.f = constant_function(0.0);
  const Vector u = robin_solve(V, d);
  for (const auto& s : robin_shape_tensors(V, d, u, robin_adjoint(V, d, u)).S0) CHECK(s.norm() == 0.0);
}

TEST_CASE("Robin: manufactured solution converges at second order in L2") {
  // u = 1 + x², −Δu = −2, ∂ₙu + u = g edge by edge on the unit square.
  RobinData d;
  d.f = constant_function(-2.0);
  d.beta = constant_function(1.0);
  d.g.name = "robin_trace";
  d.g.value = [](const Vec2& x) { return 1.0 + x(0) * x(0) + (x(0) == 1.0 ? 2.0 : 0.0); };
  d.g.grad = [](const Vec2& x) { return Vec2(2.0 * x(0), 0.0); };
  d.g.hess = [](const Vec2&) { return Mat2::Zero().eval(); };
  d.g.grad_lap = [](const Vec2&) { return Vec2::Zero().eval(); };
  std::vector<double> err;
  for (int n : {8, 16, 32}) {
    const FeSpace V(gen_rectangle(0, 0, 1, 1, n, n), 1);
    err.push_back(l2_error(V, robin_solve(V, d), [](const Vec2& x) { return 1.0 + x(0) * x(0); }));
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.9);
  CHECK(std::log2(err[1] / err[2]) >= 1.9);
}

TEST_CASE("Robin: adjoint solves the transposed system") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 2);
  const RobinData d = robin_data();
  const Vector u = robin_solve(V, d);
  const Vector p = robin_adjoint(V, d, u);
  const SparseMatrix A = robin_operator(V, d);
  const Vector B = robin_B(V, u);
  std::mt19937_64 gen(17);
  std::normal_distribution<double> n;
  for (int i = 0; i < 10; ++i) {
    Vector v(V.dof_count());
    for (auto& c : v) c = n(gen);
    const double lhs = (A * v).dot(p);
    CHECK(std::abs(lhs + v.dot(B)) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
  // Independent assembly of the same bilinear form, solved densely.
  const SparseMatrix K = assemble_diffusion(V, [&](const Vec2&) { return d.M; });
  const SparseMatrix R = assemble_boundary_mass(V, kAnyMarker, d.beta.value);
  const Eigen::MatrixXd At = Eigen::MatrixXd(K + R).transpose();
  const Vector q = At.partialPivLu().solve(-B);
  CHECK((q - p).norm() <= 1e-10 * (1.0 + p.norm()));
}

TEST_CASE("zero field gives a zero material derivative") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 1);
  const ThetaField zero(mesh, VectorField{}, VelocityMode::analytic);
  const RobinData r = robin_data();
  CHECK(robin_material(V, r, robin_solve(V, r), zero).cwiseAbs().maxCoeff() == 0.0);
  const QuasilinearData q = quasilinear_data();
  CHECK(quasilinear_material(V, q, quasilinear_solve(V, q), zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Robin: tensor form equals the Lagrangian form") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  const RobinData d = robin_data();
  const Vector u = robin_solve(V, d);
  const Vector p = robin_adjoint(V, d, u);
  const ShapeTensors T = robin_shape_tensors(V, d, u, p);
  const VectorField theta = crossing_field();
  for (VelocityMode mode : {VelocityMode::analytic, VelocityMode::nodal_interpolant}) {
    const ThetaField th(mesh, theta, mode);
    const double lagrangian = robin_dB(V, u, th) + robin_L(V, d, u, th).dot(p);
    const double tensor = assemble_dJ(mesh, T, theta, mode).total();
    CHECK(std::abs(tensor - lagrangian) <= 1e-12 * (1.0 + std::abs(lagrangian)));
  }
}

TEST_CASE("Robin: duality and finite differences") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  const RobinData d = robin_data();
  const Vector u = robin_solve(V, d);
  const Vector p = robin_adjoint(V, d, u);
  const VectorField theta = crossing_field();
  const ThetaField th(mesh, theta, VelocityMode::nodal_interpolant);
  const Vector udot = robin_material(V, d, u, th);
  DualityReport r{robin_L(V, d, u, th).dot(p), robin_B(V, u).dot(udot)};
  CHECK(r.rel_gap() <= 1e-9);

  const double dJ = assemble_dJ(mesh, robin_shape_tensors(V, d, u, p), theta, VelocityMode::nodal_interpolant).total();
  auto cost = [&](const Mesh& m) {
    const FeSpace W(m, 1);
    return robin_cost(W, robin_solve(W, d));
  };
  const auto [e1, e2] = fd_errors(cost, mesh, theta, dJ, 0.02);
  CHECK(e2 < e1);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(e2 <= 1e-4 * std::abs(dJ));
}

TEST_CASE("Robin: rejects an indefinite coefficient and a nonpositive beta") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 1);
  const FeSpace V(mesh, 1);
  RobinData d = robin_data();
  d.M << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(robin_solve(V, d), InvalidInput);
  d = robin_data();
  d.beta = sf("affine 0 1 0");
  CHECK_THROWS_AS(robin_solve(V, d), InvalidInput);
}

TEST_CASE("quasilinear: Newton converges quadratically") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  const QuasilinearData d = quasilinear_data();
  d.check_monotonicity(mesh);
  const NewtonResult res = quasilinear_newton(V, d);
  CHECK(res.iterations >= 2);
  CHECK(res.iterations <= 8);
  CHECK(res.residuals.back() <= 1e-11 * res.residuals.front());
  // Residual reduction accelerates: the last ratio is far below the first.
  const std::size_t n = res.residuals.size();
  CHECK(res.residuals[n - 1] / res.residuals[n - 2] < res.residuals[1] / res.residuals[0]);
}

TEST_CASE("quasilinear: Newton residual ratios stay bounded") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  const NewtonResult res = quasilinear_newton(V, quasilinear_data());
  const auto& r = res.residuals;
  // Quadratic contraction once the iterates are close: r_{k+1} / r_k² stays O(1).
  for (std::size_t k = 1; k + 1 < r.size(); ++k)
    if (r[k + 1] > 1e-13) CHECK(r[k + 1] / (r[k] * r[k]) <= 10.0);
}

TEST_CASE("quasilinear: zero data solves in at most one step") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 1);
  QuasilinearData d = quasilinear_data();
  d.f = make_nonlinear_function(CatalogSpec::parse("linear_r 1"));
  d.g = constant_function(0.0);
  const NewtonResult res = quasilinear_newton(V, d);
  CHECK(res.iterations <= 1);
  CHECK(res.u.cwiseAbs().maxCoeff() == 0.0);
  d.ud = constant_function(0.0);
  const Vector p = quasilinear_adjoint(V, d, res.u);
  const ShapeTensors T = quasilinear_shape_tensors(V, d, res.u, p);
  for (const auto& s : T.S0) CHECK(s.norm() == 0.0);
  for (const auto& s : T.S1) CHECK(s.norm() == 0.0);
}

TEST_CASE("quasilinear: constant coefficients reduce to the linear problem") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  QuasilinearData d;
  d.m = make_nonlinear_function(CatalogSpec::parse("m_affine 2 0 0"));
  d.f = make_nonlinear_function(CatalogSpec::parse("linear_r 1"));
  d.g = sf("gaussian 3 0.1 0.2 0.4");
  d.c2 = 0.0;
  d.check_monotonicity(mesh);
  const Vector u = quasilinear_solve(V, d);
  SparseMatrix A = assemble_diffusion(V, [](const Vec2&) { return Mat2(2.0 * Mat2::Identity()); }) +
                   assemble_mass(V, [](const Vec2&) { return 1.0; });
  Vector b = assemble_load(V, d.g.value, triangle_rule(kNonlinearVolumeDegree));
  const auto mask = V.boundary_mask();
  eliminate_dofs(A, mask);
  zero_masked(b, mask);
  const Vector lin = solve(A, b, true);
  CHECK((u - lin).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("quasilinear: matching target gives a zero adjoint") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 1);
  QuasilinearData d = quasilinear_data();
  const Vector u = quasilinear_solve(V, d);
  d.ud = as_function(V, u);
  CHECK(quasilinear_cost(V, d, u) <= 1e-28);
  CHECK(quasilinear_adjoint(V, d, u).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("quasilinear: S1 is symmetric") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 1);
  const QuasilinearData d = quasilinear_data();
  const Vector u = quasilinear_solve(V, d);
  for (const auto& s : quasilinear_shape_tensors(V, d, u, quasilinear_adjoint(V, d, u)).S1)
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + s.norm()));
}

TEST_CASE("quasilinear: Jacobian matches a difference of residuals") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 1);
  const QuasilinearData d = quasilinear_data();
  Vector u = quasilinear_solve(V, d);
  Vector w = Vector::Random(V.dof_count());
  zero_masked(w, V.boundary_mask());
  const double h = 1e-6;
  const Vector fd = (quasilinear_residual(V, d, u + h * w) - quasilinear_residual(V, d, u - h * w)) / (2 * h);
  const Vector jw = quasilinear_jacobian(V, d, u) * w;
  CHECK((fd - jw).norm() <= 1e-7 * (1.0 + jw.norm()));
}

TEST_CASE("quasilinear: monotonicity violations name the bound") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 1);
  QuasilinearData d = quasilinear_data();
  d.m = make_nonlinear_function(CatalogSpec::parse("m_algebraic 0.5 1"));
  try {
    d.check_monotonicity(mesh);
    FAIL("expected InvalidInput");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("c1") != std::string::npos);
  }
  d = quasilinear_data();
  d.f = make_nonlinear_function(CatalogSpec::parse("f_sinx 2 0.1"));
  CHECK_THROWS_AS(d.check_monotonicity(mesh), InvalidInput);
}

TEST_CASE("quasilinear: dual form, duality and finite differences") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const FeSpace V(mesh, 1);
  const QuasilinearData d = quasilinear_data();
  const Vector u = quasilinear_solve(V, d);
  const Vector p = quasilinear_adjoint(V, d, u);
  const VectorField theta = crossing_field();
  const ShapeTensors T = quasilinear_shape_tensors(V, d, u, p);
  for (VelocityMode mode : {VelocityMode::analytic, VelocityMode::nodal_interpolant}) {
    const ThetaField th(mesh, theta, mode);
    const double lagrangian = quasilinear_dB(V, d, u, th) + quasilinear_L(V, d, u, th).dot(p);
    CHECK(std::abs(assemble_dJ(mesh, T, theta, mode).total() - lagrangian) <= 1e-12 * (1.0 + std::abs(lagrangian)));
  }
  const ThetaField th(mesh, theta, VelocityMode::nodal_interpolant);
  const Vector udot = quasilinear_material(V, d, u, th);
  DualityReport r{quasilinear_L(V, d, u, th).dot(p), quasilinear_B(V, d, u).dot(udot)};
  CHECK(r.rel_gap() <= 1e-9);

  const double dJ = assemble_dJ(mesh, T, theta, VelocityMode::nodal_interpolant).total();
  auto cost = [&](const Mesh& m) {
    const FeSpace W(m, 1);
    return quasilinear_cost(W, d, quasilinear_solve(W, d));
  };
  const auto [e1, e2] = fd_errors(cost, mesh, theta, dJ, 0.02);
  CHECK(std::log2(e1 / e2) >= 1.9);
}

TEST_CASE("Dirichlet energy: adjoint is -2u") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  for (int order : {1, 2}) {
    const FeSpace V(mesh, order);
    const Vector u = dirichlet_energy_solve(V, {});
    const Vector p = dirichlet_energy_adjoint(V, u);
    CHECK((p + 2.0 * u).norm() <= 1e-10 * u.norm());
  }
}

TEST_CASE("Dirichlet energy: dual form and finite differences, P1 and P2") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 3);
  const VectorField theta = crossing_field();
  DirichletEnergyData d;
  d.f = sf("affine 1 0.5 -0.2");
  for (int order : {1, 2}) {
    CAPTURE(order);
    const FeSpace V(mesh, order);
    const auto s = dirichlet_energy_suite(V, d, theta, VelocityMode::nodal_interpolant);
    const ThetaField th(mesh, theta, VelocityMode::nodal_interpolant);
    const double lagrangian = dirichlet_energy_dB(V, s.u, th) + dirichlet_energy_L(V, d, s.u, th).dot(s.p);
    CHECK(std::abs(s.dJ_volume - lagrangian) <= 1e-12 * (1.0 + std::abs(lagrangian)));
    DualityReport r{dirichlet_energy_L(V, d, s.u, th).dot(s.p), dirichlet_energy_B(V, s.u).dot(s.u_dot)};
    CHECK(r.rel_gap() <= 1e-9);
    auto cost = [&](const Mesh& m) {
      const FeSpace W(m, order);
      return dirichlet_energy_cost(W, dirichlet_energy_solve(W, d));
    };
    const auto [e1, e2] = fd_errors(cost, mesh, theta, s.dJ_volume, 0.02);
    CHECK(std::log2(e1 / e2) >= 1.9);
  }
}

TEST_CASE("Dirichlet energy: zero source") {
  const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, 2);
  const FeSpace V(mesh, 1);
  DirichletEnergyData d;
  d.f = constant_function(0.0);
  const auto s = dirichlet_energy_suite(V, d, crossing_field());
  CHECK(s.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.dJ_volume == 0.0);
}

TEST_CASE("Dirichlet energy: boundary form approaches the volume form") {
  // f = 1 on the unit disk: u = (1 − |x|²)/4, ∂ₙu = −1/2.
  const VectorField theta = crossing_field();
  std::vector<double> gaps;
  for (int level : {2, 3, 4, 5}) {
    const Mesh mesh = gen_disk(Vec2(0, 0), 1.0, level);
    const FeSpace V(mesh, 1);
    const auto s = dirichlet_energy_suite(V, {}, theta, VelocityMode::analytic);
    gaps.push_back(std::abs(s.dJ_volume - s.dJ_boundary));
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    CAPTURE(i);
    CHECK(std::log2(gaps[i - 1] / gaps[i]) >= 0.9);
  }
}
