#include "shapegrad/manufactured.hpp"

#include <cmath>

namespace shapegrad {

namespace {

constexpr int kDegree = kNonlinearVolumeDegree;

Tensor3_2 grad_identity(const Vec2& a) { return outer_vm<2>(a, Mat2::Identity()); }

}  // namespace

ManufacturedFields default_manufactured_fields() {
  ManufacturedFields m;
  m.u = make_scalar_function(CatalogSpec::parse("quadratic 0.25 0 0 -0.25 0 -0.25"));
  m.p = make_scalar_function(CatalogSpec::parse("quadratic -0.5 0 0 0.5 0 0.5"));
  m.h = make_scalar_function(CatalogSpec::parse("quadratic 0.1 0.2 -0.1 0.3 0.1 -0.2"));
  m.F = tracking_integrand(make_scalar_function(CatalogSpec::parse("quadratic 0.05 0.1 0 0 0.2 0")));
  return m;
}

ShapeTensors prop5_tensors(const ManufacturedFields& m, const Mesh& mesh) {
  ShapeTensors T;
  T.volume_degree = kDegree;
  const FeSpace V(mesh, 1);
  for_each_quad_point(V, triangle_rule(kDegree), [&](std::size_t, const QuadPoint& q) {
    const Vec2& x = q.x;
    const double u = m.u(x), p = m.p(x), h = m.h(x);
    const Mat2 Hp = m.p.hess(x);
    const double lap_p = Hp.trace();
    T.S0.push_back(m.F.dx(x, u) + (lap_p - p) * m.h.grad(x));
    T.S1.push_back(2.0 * (u - h) * Hp + (h * (lap_p - p) - u * lap_p + m.F.value(x, u)) * Mat2::Identity());
    T.S2.push_back(grad_identity((u - h) * m.p.grad(x)));
  });
  for_each_boundary_point(V, edge_rule(T.edge_degree), kAnyMarker, [&](std::size_t, int, const BoundaryPoint& q) {
    const Vec2& x = q.x;
    const Vec2& n = q.normal;
    const double dnp = m.p.grad(x).dot(n);
    T.S0_gamma.push_back(-dnp * m.h.grad(x));
    T.S1_gamma.push_back(-m.h(x) * dnp * (Mat2::Identity() - 2.0 * outer<2>(n, n)));
  });
  return T;
}

double prop5_raw(const ManufacturedFields& m, const Mesh& mesh, const VectorField& theta) {
  const FeSpace V(mesh, 1);
  double vol = 0.0, bnd = 0.0;
  for_each_quad_point(V, triangle_rule(kDegree), [&](std::size_t, const QuadPoint& q) {
    const Vec2& x = q.x;
    const double u = m.u(x), p = m.p(x), h = m.h(x);
    const Vec2 gp = m.p.grad(x), gh = m.h.grad(x);
    const Mat2 Hp = m.p.hess(x);
    const double lap_p = Hp.trace();
    const Vec2 th = theta.eval(x);
    const Mat2 J = theta.jac(x);
    const double div = J.trace();
    const Vec2 lap_theta = vector_laplacian<2>(theta.hess(x));
    const double div_h_theta = gh.dot(th) + h * div;
    const double v = (h - u) * (-2.0 * double_dot<2>(Hp, J) - lap_theta.dot(gp)) - u * lap_p * div -
                     (-lap_p + p) * div_h_theta + m.F.dx(x, u).dot(th) + m.F.value(x, u) * div;
    vol += q.w * v;
  });
  for_each_boundary_point(V, edge_rule(kDefaultEdgeDegree), kAnyMarker,
                          [&](std::size_t, int, const BoundaryPoint& q) {
                            const Vec2& x = q.x;
                            const Vec2& n = q.normal;
                            const double dnp = m.p.grad(x).dot(n);
                            const Mat2 J = theta.jac(x);
                            const double v = dnp * m.h.grad(x).dot(theta.eval(x)) +
                                             m.h(x) * dnp * (div_gamma(J, n) - n.dot(J * n));
                            bnd -= q.w * v;
                          });
  return vol + bnd;
}

ShapeTensors prop6_tensors(const ManufacturedFields& m, const Mesh& mesh) {
  ShapeTensors T;
  T.volume_degree = kDegree;
  const FeSpace V(mesh, 1);
  for_each_quad_point(V, triangle_rule(kDegree), [&](std::size_t, const QuadPoint& q) {
    const Vec2& x = q.x;
    const double p = m.p(x);
    const Vec2 gu = m.u.grad(x);
    const Mat2 Hu = m.u.hess(x);
    const Vec2 grad_f = -m.u.grad_lap(x);
    T.S0.push_back(-p * grad_f);
    T.S1.push_back(2.0 * p * Hu - 2.0 * Hu * Hu + 0.5 * Hu.squaredNorm() * Mat2::Identity());
    T.S2.push_back(grad_identity(p * gu) - outer_vm<2>(gu, Hu));
  });
  return T;
}

double prop6_raw(const ManufacturedFields& m, const Mesh& mesh, const VectorField& theta) {
  const FeSpace V(mesh, 1);
  double sum = 0.0;
  for_each_quad_point(V, triangle_rule(kDegree), [&](std::size_t, const QuadPoint& q) {
    const Vec2& x = q.x;
    const double p = m.p(x);
    const Vec2 gu = m.u.grad(x);
    const Mat2 Hu = m.u.hess(x);
    const double lap_u = Hu.trace();
    const double f = -lap_u;
    const Vec2 grad_f = -m.u.grad_lap(x);
    const Vec2 th = theta.eval(x);
    const Mat2 J = theta.jac(x);
    const Tensor3_2 H = theta.hess(x);
    const double div = J.trace();
    const double state_part = p * (2.0 * double_dot<2>(Hu, J) + vector_laplacian<2>(H).dot(gu)) -
                              p * lap_u * div - p * f * div - p * grad_f.dot(th);
    const Mat2 rate = -J.transpose() * Hu - Hu * J - matvec3<2>(transpose3<2>(H), gu);
    const double cost_part = double_dot<2>(rate, Hu) + 0.5 * Hu.squaredNorm() * div;
    sum += q.w * (state_part + cost_part);
  });
  return sum;
}

double cost_transport_derivative(const ManufacturedFields& m, const Mesh& mesh, const VectorField& theta) {
  if (theta.is_zero()) return 0.0;
  const FeSpace V(mesh, 1);
  double sum = 0.0;
  for_each_quad_point(V, triangle_rule(kDegree), [&](std::size_t, const QuadPoint& q) {
    const double u = m.u(q.x);
    sum += q.w * (m.F.dx(q.x, u).dot(theta.eval(q.x)) + m.F.value(q.x, u) * theta.div(q.x));
  });
  return sum;
}

double cost_transport_value(const ManufacturedFields& m, const Mesh& mesh, const VectorField& theta, double s,
                            int steps) {
  const VectorField field = s < 0.0 ? theta.negated() : theta;
  const double a = std::abs(s);
  const FeSpace V(mesh, 1);
  double sum = 0.0;
  for_each_quad_point(V, triangle_rule(kDegree), [&](std::size_t, const QuadPoint& q) {
    const FlowState st = advect(field, a, q.x, steps);
    sum += q.w * m.F.value(st.position, m.u(q.x)) * xi(st);
  });
  return sum;
}

double manufactured_cost(const ManufacturedFields& m, const Mesh& mesh) {
  return cost_transport_value(m, mesh, VectorField(), 0.0, 1);
}

}  // namespace shapegrad
