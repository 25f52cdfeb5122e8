#include "shapegrad/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shapegrad {

namespace {

const QuadratureRule& volume_rule() {
  static const QuadratureRule r = triangle_rule(kDefaultVolumeDegree);
  return r;
}
const QuadratureRule& nonlinear_rule() {
  static const QuadratureRule r = triangle_rule(kNonlinearVolumeDegree);
  return r;
}
const EdgeRule& boundary_rule() {
  static const EdgeRule r = edge_rule(kDefaultEdgeDegree);
  return r;
}

// Unit-coefficient stiffness times u: ∫∇u·∇φ_i.
Vector gradient_pairing(const FeSpace& V, const Vector& u, const QuadratureRule& rule) {
  return assemble_vector(V, rule, [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const Vec2 gu = field_gradient(V, u, t, q);
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * gu.dot(q.dphi[i]);
  });
}

// ∫ div(fθ) φ_i with the analytic gradient of f.
Vector transported_source(const FeSpace& V, const ScalarFunction& f, const ThetaField& theta,
                          const QuadratureRule& rule) {
  return assemble_vector(V, rule, [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const double v = f.grad(q.x).dot(theta.value(t, q)) + f(q.x) * theta.div(t, q);
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * v * q.phi[i];
  });
}

}  // namespace

void zero_masked(Vector& v, const std::vector<char>& mask) {
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) v[static_cast<int>(i)] = 0.0;
}

// ---------------------------------------------------------------------------
// Robin

void RobinData::validate(const FeSpace& V) const {
  if (std::abs(M(0, 1) - M(1, 0)) > 1e-12 * M.cwiseAbs().maxCoeff()) throw InvalidInput("Robin: M is not symmetric");
  if (!(M(0, 0) > 0.0 && M.determinant() > 0.0)) throw InvalidInput("Robin: M is not positive definite");
  for_each_boundary_point(V, boundary_rule(), kAnyMarker, [&](std::size_t, int, const BoundaryPoint& q) {
    if (!(beta(q.x) > 0.0)) throw InvalidInput("Robin: beta must be positive on the boundary");
  });
}

SparseMatrix robin_operator(const FeSpace& V, const RobinData& d) {
  const Mat2 M = d.M;
  return assemble_diffusion(V, [M](const Vec2&) { return M; }, volume_rule()) +
         assemble_boundary_mass(V, kAnyMarker, d.beta.value, boundary_rule());
}

Vector robin_solve(const FeSpace& V, const RobinData& d) {
  d.validate(V);
  const Vector b = assemble_load(V, d.f.value, volume_rule()) +
                   assemble_boundary_load(V, kAnyMarker, d.g.value, boundary_rule());
  return solve(robin_operator(V, d), b, true);
}

double robin_cost(const FeSpace& V, const Vector& u) {
  double sum = 0.0;
  for_each_quad_point(V, volume_rule(), [&](std::size_t t, const QuadPoint& q) {
    sum += 0.5 * q.w * field_gradient(V, u, t, q).squaredNorm();
  });
  return sum;
}

Vector robin_B(const FeSpace& V, const Vector& u) { return gradient_pairing(V, u, volume_rule()); }

Vector robin_adjoint(const FeSpace& V, const RobinData& d, const Vector& u) {
  // M symmetric, so A* has the matrix of A.
  return solve(robin_operator(V, d), -robin_B(V, u), true);
}

Vector robin_L(const FeSpace& V, const RobinData& d, const Vector& u, const ThetaField& theta) {
  Vector L = assemble_vector(V, volume_rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const Vec2 flux = m_prime0(theta.jac(t, q), d.M) * field_gradient(V, u, t, q);
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * flux.dot(q.dphi[i]);
  });
  L -= transported_source(V, d.f, theta, volume_rule());
  L += assemble_boundary_vector(V, boundary_rule(), kAnyMarker, [&](int t, const BoundaryPoint& q, ElementVector& Fe) {
    const double uq = field_value(V, u, t, q);
    const double dg = div_gamma(theta.jac(t, q), q.normal);
    const double v = (d.beta(q.x) * uq - d.g(q.x)) * dg +
                     (uq * d.beta.grad(q.x) - d.g.grad(q.x)).dot(theta.value(t, q));
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * v * q.phi[i];
  });
  return L;
}

double robin_dB(const FeSpace& V, const Vector& u, const ThetaField& theta) {
  double sum = 0.0;
  for_each_quad_point(V, volume_rule(), [&](std::size_t t, const QuadPoint& q) {
    const Vec2 gu = field_gradient(V, u, t, q);
    const Mat2 J = theta.jac(t, q);
    sum += q.w * (0.5 * gu.squaredNorm() * J.trace() - gu.dot(J.transpose() * gu));
  });
  return sum;
}

Vector robin_material(const FeSpace& V, const RobinData& d, const Vector& u, const ThetaField& theta) {
  return solve(robin_operator(V, d), -robin_L(V, d, u, theta), true);
}

ShapeTensors robin_shape_tensors(const FeSpace& V, const RobinData& d, const Vector& u, const Vector& p) {
  ShapeTensors T;
  T.volume_degree = kDefaultVolumeDegree;
  T.edge_degree = kDefaultEdgeDegree;
  T.s1_gamma_tangential = true;
  const Mat2& M = d.M;
  for_each_quad_point(V, volume_rule(), [&](std::size_t t, const QuadPoint& q) {
    const Vec2 gu = field_gradient(V, u, t, q), gp = field_gradient(V, p, t, q);
    const double pq = field_value(V, p, t, q);
    const double fq = d.f(q.x);
    T.S0.push_back(-pq * d.f.grad(q.x));
    T.S1.push_back(-outer<2>(gp, M * gu) - outer<2>(gu, M * gp) - outer<2>(gu, gu) +
                   ((M * gu).dot(gp) - fq * pq + 0.5 * gu.squaredNorm()) * Mat2::Identity());
  });
  for_each_boundary_point(V, boundary_rule(), kAnyMarker, [&](std::size_t, int t, const BoundaryPoint& q) {
    const double uq = field_value(V, u, t, q), pq = field_value(V, p, t, q);
    T.S0_gamma.push_back(pq * (uq * d.beta.grad(q.x) - d.g.grad(q.x)));
    T.S1_gamma.push_back((d.beta(q.x) * uq - d.g(q.x)) * pq * Mat2::Identity());
  });
  return T;
}

// ---------------------------------------------------------------------------
// Quasilinear

void QuasilinearData::check_monotonicity(const Mesh& mesh) const {
  Vec2 lo = mesh.nodes().front(), hi = lo;
  for (const auto& x : mesh.nodes()) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  auto fail = [](const std::string& what, const Vec2& y, double r, double v) {
    std::ostringstream s;
    s.precision(6);
    s << "monotonicity condition violated: " << what << " at y = (" << y(0) << ", " << y(1) << "), r = " << r
      << " (value " << v << ")";
    throw InvalidInput(s.str());
  };
  for (int i = 0; i < scan_x; ++i)
    for (int j = 0; j < scan_x; ++j) {
      const Vec2 y(lo(0) + (hi(0) - lo(0)) * i / std::max(1, scan_x - 1),
                   lo(1) + (hi(1) - lo(1)) * j / std::max(1, scan_x - 1));
      for (int k = 0; k < scan_r; ++k) {
        const double r = -r_check + 2.0 * r_check * k / std::max(1, scan_r - 1);
        const double mv = m.value(y, r), dm = m.dr(y, r), df = f.dr(y, r);
        if (!(c1 <= mv)) fail("c1 <= m(y,r)", y, r, mv);
        if (!(c2 <= std::min(df, dm))) fail("c2 <= min(d_r f, d_r m)", y, r, std::min(df, dm));
        if (!(std::max(df, dm) <= c3)) fail("max(d_r f, d_r m) <= c3", y, r, std::max(df, dm));
      }
    }
}

Vector quasilinear_residual(const FeSpace& V, const QuasilinearData& d, const Vector& u) {
  Vector R = assemble_vector(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const double uq = field_value(V, u, t, q);
    const Vec2 flux = d.m.value(q.x, uq) * field_gradient(V, u, t, q);
    const double src = d.f.value(q.x, uq) - d.g(q.x);
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * (flux.dot(q.dphi[i]) + src * q.phi[i]);
  });
  zero_masked(R, V.boundary_mask());
  return R;
}

SparseMatrix quasilinear_jacobian(const FeSpace& V, const QuasilinearData& d, const Vector& u) {
  // Row i tests with ψ = φ_i, column j is the direction φ̂ = φ_j.
  SparseMatrix A = assemble_matrix(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q, ElementMatrix& Ke) {
    const double uq = field_value(V, u, t, q);
    const Vec2 gu = field_gradient(V, u, t, q);
    const double mv = d.m.value(q.x, uq), dm = d.m.dr(q.x, uq), df = d.f.dr(q.x, uq);
    for (int i = 0; i < q.n; ++i) {
      const double gi = gu.dot(q.dphi[i]);
      for (int j = 0; j < q.n; ++j)
        Ke(i, j) += q.w * (dm * q.phi[j] * gi + mv * q.dphi[j].dot(q.dphi[i]) + df * q.phi[i] * q.phi[j]);
    }
  });
  eliminate_dofs(A, V.boundary_mask());
  return A;
}

NewtonResult quasilinear_newton(const FeSpace& V, const QuasilinearData& d) {
  NewtonResult out;
  out.u = Vector::Zero(V.dof_count());
  Vector R = quasilinear_residual(V, d, out.u);
  const double r0 = R.norm();
  out.residuals.push_back(r0);
  while (!(R.norm() <= 1e-11 * r0 || R.norm() <= 1e-13)) {
    if (out.iterations == kNewtonMaxIter)
      throw ConvergenceError("Newton iteration did not converge in " + std::to_string(kNewtonMaxIter) + " steps",
                             out.residuals);
    out.u += solve(quasilinear_jacobian(V, d, out.u), -R, false);
    ++out.iterations;
    R = quasilinear_residual(V, d, out.u);
    out.residuals.push_back(R.norm());
  }
  return out;
}

Vector quasilinear_solve(const FeSpace& V, const QuasilinearData& d) { return quasilinear_newton(V, d).u; }

double quasilinear_cost(const FeSpace& V, const QuasilinearData& d, const Vector& u) {
  double sum = 0.0;
  for_each_quad_point(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q) {
    const double e = field_value(V, u, t, q) - d.ud(q.x);
    sum += 0.5 * q.w * e * e;
  });
  return sum;
}

Vector quasilinear_B(const FeSpace& V, const QuasilinearData& d, const Vector& u) {
  Vector B = assemble_vector(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const double e = field_value(V, u, t, q) - d.ud(q.x);
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * e * q.phi[i];
  });
  zero_masked(B, V.boundary_mask());
  return B;
}

Vector quasilinear_adjoint(const FeSpace& V, const QuasilinearData& d, const Vector& u) {
  const SparseMatrix At = SparseMatrix(quasilinear_jacobian(V, d, u).transpose());
  return solve(At, -quasilinear_B(V, d, u), false);
}

Vector quasilinear_L(const FeSpace& V, const QuasilinearData& d, const Vector& u, const ThetaField& theta) {
  Vector L = assemble_vector(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const double uq = field_value(V, u, t, q);
    const Vec2 gu = field_gradient(V, u, t, q);
    const Vec2 th = theta.value(t, q);
    const Mat2 J = theta.jac(t, q);
    const double div = J.trace();
    const Vec2 flux = d.m.value(q.x, uq) * (m_prime0(J, Mat2::Identity()) * gu) + d.m.dx(q.x, uq).dot(th) * gu;
    const double src = d.f.value(q.x, uq) * div + d.f.dx(q.x, uq).dot(th) - d.g.grad(q.x).dot(th) - d.g(q.x) * div;
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * (flux.dot(q.dphi[i]) + src * q.phi[i]);
  });
  zero_masked(L, V.boundary_mask());
  return L;
}

double quasilinear_dB(const FeSpace& V, const QuasilinearData& d, const Vector& u, const ThetaField& theta) {
  double sum = 0.0;
  for_each_quad_point(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q) {
    const double e = field_value(V, u, t, q) - d.ud(q.x);
    sum += q.w * (-e * d.ud.grad(q.x).dot(theta.value(t, q)) + 0.5 * e * e * theta.div(t, q));
  });
  return sum;
}

Vector quasilinear_material(const FeSpace& V, const QuasilinearData& d, const Vector& u, const ThetaField& theta) {
  return solve(quasilinear_jacobian(V, d, u), -quasilinear_L(V, d, u, theta), false);
}

ShapeTensors quasilinear_shape_tensors(const FeSpace& V, const QuasilinearData& d, const Vector& u,
                                       const Vector& p) {
  ShapeTensors T;
  T.volume_degree = kNonlinearVolumeDegree;
  for_each_quad_point(V, nonlinear_rule(), [&](std::size_t t, const QuadPoint& q) {
    const double uq = field_value(V, u, t, q), pq = field_value(V, p, t, q);
    const Vec2 gu = field_gradient(V, u, t, q), gp = field_gradient(V, p, t, q);
    const double mv = d.m.value(q.x, uq), e = uq - d.ud(q.x);
    T.S0.push_back(gu.dot(gp) * d.m.dx(q.x, uq) + pq * d.f.dx(q.x, uq) - pq * d.g.grad(q.x) - e * d.ud.grad(q.x));
    T.S1.push_back(-mv * (outer<2>(gp, gu) + outer<2>(gu, gp)) +
                   (mv * gu.dot(gp) + d.f.value(q.x, uq) * pq - d.g(q.x) * pq + 0.5 * e * e) * Mat2::Identity());
  });
  return T;
}

// ---------------------------------------------------------------------------
// Dirichlet energy

namespace {
SparseMatrix laplacian_dirichlet(const FeSpace& V) {
  SparseMatrix K = assemble_diffusion(V, [](const Vec2&) { return Mat2::Identity().eval(); }, volume_rule());
  eliminate_dofs(K, V.boundary_mask());
  return K;
}
}  // namespace

Vector dirichlet_energy_solve(const FeSpace& V, const DirichletEnergyData& d) {
  Vector b = assemble_load(V, d.f.value, volume_rule());
  zero_masked(b, V.boundary_mask());
  return solve(laplacian_dirichlet(V), b, true);
}

double dirichlet_energy_cost(const FeSpace& V, const Vector& u) { return 2.0 * robin_cost(V, u); }

Vector dirichlet_energy_B(const FeSpace& V, const Vector& u) {
  Vector B = 2.0 * gradient_pairing(V, u, volume_rule());
  zero_masked(B, V.boundary_mask());
  return B;
}

Vector dirichlet_energy_adjoint(const FeSpace& V, const Vector& u) {
  return solve(laplacian_dirichlet(V), -dirichlet_energy_B(V, u), true);
}

Vector dirichlet_energy_L(const FeSpace& V, const DirichletEnergyData& d, const Vector& u, const ThetaField& theta) {
  Vector L = assemble_vector(V, volume_rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const Vec2 flux = m_prime0(theta.jac(t, q), Mat2::Identity()) * field_gradient(V, u, t, q);
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * flux.dot(q.dphi[i]);
  });
  L -= transported_source(V, d.f, theta, volume_rule());
  zero_masked(L, V.boundary_mask());
  return L;
}

double dirichlet_energy_dB(const FeSpace& V, const Vector& u, const ThetaField& theta) {
  double sum = 0.0;
  for_each_quad_point(V, volume_rule(), [&](std::size_t t, const QuadPoint& q) {
    const Vec2 gu = field_gradient(V, u, t, q);
    sum += q.w * gu.dot(m_prime0(theta.jac(t, q), Mat2::Identity()) * gu);
  });
  return sum;
}

Vector dirichlet_energy_material(const FeSpace& V, const DirichletEnergyData& d, const Vector& u,
                                 const ThetaField& theta) {
  return solve(laplacian_dirichlet(V), -dirichlet_energy_L(V, d, u, theta), true);
}

ShapeTensors dirichlet_energy_shape_tensors(const FeSpace& V, const DirichletEnergyData& d, const Vector& u) {
  ShapeTensors T;
  T.volume_degree = kDefaultVolumeDegree;
  for_each_quad_point(V, volume_rule(), [&](std::size_t t, const QuadPoint& q) {
    const double uq = field_value(V, u, t, q);
    const Vec2 gu = field_gradient(V, u, t, q);
    T.S0.push_back(2.0 * uq * d.f.grad(q.x));
    T.S1.push_back(2.0 * outer<2>(gu, gu) + (2.0 * d.f(q.x) * uq - gu.squaredNorm()) * Mat2::Identity());
  });
  return T;
}

double dirichlet_energy_boundary_form(const FeSpace& V, const Vector& u, const VectorField& theta) {
  double sum = 0.0;
  for_each_boundary_point(V, boundary_rule(), kAnyMarker, [&](std::size_t, int t, const BoundaryPoint& q) {
    const double dn = field_gradient(V, u, t, q).dot(q.normal);
    sum += q.w * dn * dn * theta.eval(q.x).dot(q.normal);
  });
  return sum;
}

DirichletEnergySuite dirichlet_energy_suite(const FeSpace& V, const DirichletEnergyData& d, const VectorField& theta,
                                            VelocityMode mode) {
  DirichletEnergySuite s;
  const ThetaField th(V.mesh(), theta, mode);
  s.u = dirichlet_energy_solve(V, d);
  s.p = dirichlet_energy_adjoint(V, s.u);
  s.u_dot = dirichlet_energy_material(V, d, s.u, th);
  s.tensors = dirichlet_energy_shape_tensors(V, d, s.u);
  s.dJ_volume = assemble_dJ(V.mesh(), s.tensors, theta, mode).total();
  s.dJ_boundary = dirichlet_energy_boundary_form(V, s.u, theta);
  return s;
}

}  // namespace shapegrad
