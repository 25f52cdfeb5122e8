#include "shapegrad/shape_assembly.hpp"

namespace shapegrad {

ThetaField::ThetaField(const Mesh& mesh, const VectorField& theta, VelocityMode mode)
    : theta_(theta), mode_(mode) {
  if (mode_ != VelocityMode::nodal_interpolant) return;
  std::vector<Vec2> nodal(mesh.num_nodes());
  for (std::size_t i = 0; i < nodal.size(); ++i) nodal[i] = theta_.eval(mesh.nodes()[i]);
  vertex_values_.resize(mesh.num_triangles());
  element_jac_.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    Mat2 J = Mat2::Zero();
    for (int k = 0; k < 3; ++k) {
      const Vec2& v = nodal[mesh.triangles()[t][k]];
      vertex_values_[t][k] = v;
      J += v * g.grad_lambda[k].transpose();
    }
    element_jac_[t] = J;
  }
}

Vec2 ThetaField::value(std::size_t t, const QuadPoint& q) const {
  if (mode_ == VelocityMode::analytic) return theta_.eval(q.x);
  const auto& v = vertex_values_[t];
  return q.lambda[0] * v[0] + q.lambda[1] * v[1] + q.lambda[2] * v[2];
}

Mat2 ThetaField::jac(std::size_t t, const QuadPoint& q) const {
  if (mode_ == VelocityMode::analytic) return theta_.jac(q.x);
  return element_jac_[t];
}

Tensor3_2 ThetaField::hess(std::size_t t, const QuadPoint& q) const {
  if (mode_ == VelocityMode::analytic) return theta_.hess(q.x);
  (void)t;
  return Tensor3_2::zero();
}

std::size_t volume_point_count(const Mesh& mesh, int degree) {
  return mesh.num_triangles() * triangle_rule(degree).points.size();
}

std::size_t boundary_point_count(const Mesh& mesh, int degree) {
  return mesh.boundary().size() * edge_rule(degree).points.size();
}

DerivativeTerms assemble_dJ(const Mesh& mesh, const ShapeTensors& T, const VectorField& theta, VelocityMode mode) {
  DerivativeTerms out;
  const std::size_t nv = volume_point_count(mesh, T.volume_degree);
  const std::size_t nb = boundary_point_count(mesh, T.edge_degree);
  auto check = [](const auto& v, std::size_t n, const char* what) {
    if (!v.empty() && v.size() != n)
      throw InvalidInput(std::string("shape tensor ") + what + " has " + std::to_string(v.size()) +
                         " samples, mesh needs " + std::to_string(n));
  };
  check(T.S0, nv, "S0");
  check(T.S1, nv, "S1");
  check(T.S2, nv, "S2");
  check(T.S0_gamma, nb, "S0_gamma");
  check(T.S1_gamma, nb, "S1_gamma");
  if (theta.is_zero()) return out;

  const FeSpace V(mesh, 1);
  const ThetaField th(mesh, theta, mode);
  // Elements and edges the support box cannot reach contribute nothing.
  const Box& box = theta.support_box();
  std::vector<char> active(mesh.num_triangles(), 0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    Box b{mesh.nodes()[mesh.triangles()[t][0]], mesh.nodes()[mesh.triangles()[t][0]]};
    for (int k = 1; k < 3; ++k) {
      b.lo = b.lo.cwiseMin(mesh.nodes()[mesh.triangles()[t][k]]);
      b.hi = b.hi.cwiseMax(mesh.nodes()[mesh.triangles()[t][k]]);
    }
    active[t] = b.intersects(box);
  }

  if (T.has_volume()) {
    std::size_t k = 0;
    for_each_quad_point(V, triangle_rule(T.volume_degree), [&](std::size_t t, const QuadPoint& q) {
      const std::size_t i = k++;
      if (!active[t]) return;
      if (!T.S0.empty()) out.S0 += q.w * T.S0[i].dot(th.value(t, q));
      if (!T.S1.empty()) out.S1 += q.w * double_dot<2>(T.S1[i], th.jac(t, q));
      if (!T.S2.empty()) out.S2 += q.w * triple_dot<2>(T.S2[i], th.hess(t, q));
    });
  }
  if (T.has_boundary()) {
    std::size_t k = 0;
    for_each_boundary_point(V, edge_rule(T.edge_degree), kAnyMarker,
                            [&](std::size_t, int t, const BoundaryPoint& q) {
                              const std::size_t i = k++;
                              if (!active[t]) return;
                              if (!T.S0_gamma.empty()) out.S0_gamma += q.w * T.S0_gamma[i].dot(th.value(t, q));
                              if (!T.S1_gamma.empty()) {
                                Mat2 J = th.jac(t, q);
                                if (T.s1_gamma_tangential) J = jac_gamma(J, q.normal);
                                out.S1_gamma += q.w * double_dot<2>(T.S1_gamma[i], J);
                              }
                            });
  }
  return out;
}

}  // namespace shapegrad
