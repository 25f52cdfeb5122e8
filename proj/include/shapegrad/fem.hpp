#pragma once

// P1/P2 Lagrange spaces on triangle meshes, quadrature-point iteration,
// form assembly, Dirichlet elimination and direct sparse solves.

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "shapegrad/mesh.hpp"
#include "shapegrad/quadrature.hpp"

namespace shapegrad {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Marker value selecting every boundary edge.
inline constexpr int kAnyMarker = -1;

/// Scalar Lagrange space of order 1 or 2. Holds its own copy of the mesh.
/// P2 dofs: vertices first, then one per mesh edge (in Mesh::edges order).
class FeSpace {
 public:
  FeSpace(const Mesh& mesh, int order);

  const Mesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  std::size_t dof_count() const { return coords_.size(); }
  int local_count() const { return order_ == 1 ? 3 : 6; }

  /// Local dofs: vertices 0..2, then (P2) edge e joining vertices e and (e+1)%3.
  const std::array<int, 6>& element_dofs(std::size_t t) const { return dofs_[t]; }
  const std::vector<Vec2>& dof_coords() const { return coords_; }

  /// 1 for dofs on edges with the given marker (kAnyMarker: all boundary edges).
  std::vector<char> boundary_mask(int marker = kAnyMarker) const;
  std::vector<int> boundary_dofs(int marker = kAnyMarker) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  std::vector<std::array<int, 6>> dofs_;
  std::vector<Vec2> coords_;
};

/// Affine element data: x = x0 + B(ξ, η).
struct ElementGeometry {
  Vec2 x0;
  Mat2 B;
  double det = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Vec2 map(const Vec2& ref) const { return x0 + B * ref; }
};

ElementGeometry element_geometry(const Mesh& mesh, std::size_t t);

/// Basis values and gradients at one point of one element.
struct QuadPoint {
  Vec2 x;
  double w = 0.0;  // physical weight
  std::array<double, 3> lambda{};
  int n = 3;
  std::array<double, 6> phi{};
  std::array<Vec2, 6> dphi{};
};

void eval_basis(int order, const std::array<double, 3>& lambda, const std::array<Vec2, 3>& grad_lambda,
                QuadPoint& q);

/// Boundary point with the basis of the adjacent triangle (one-sided traces).
struct BoundaryPoint : QuadPoint {
  Vec2 normal;
  std::size_t edge = 0;
  int triangle = 0;
};

template <typename F>
void for_each_quad_point(const FeSpace& V, const QuadratureRule& rule, F&& f) {
  const Mesh& mesh = V.mesh();
  QuadPoint q;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const Vec2& r = rule.points[k];
      q.x = g.map(r);
      q.w = rule.weights[k] * g.det;
      eval_basis(V.order(), {1.0 - r(0) - r(1), r(0), r(1)}, g.grad_lambda, q);
      f(t, q);
    }
  }
}

template <typename F>
void for_each_boundary_point(const FeSpace& V, const EdgeRule& rule, int marker, F&& f) {
  const Mesh& mesh = V.mesh();
  if (marker != kAnyMarker && !mesh.has_marker(marker))
    throw InvalidInput("unknown boundary marker " + std::to_string(marker));
  BoundaryPoint q;
  for (std::size_t i = 0; i < mesh.boundary().size(); ++i) {
    const auto& be = mesh.boundary()[i];
    if (marker != kAnyMarker && be.marker != marker) continue;
    const int t = mesh.boundary_triangle(i);
    const int e = mesh.boundary_local_edge(i);
    const ElementGeometry g = element_geometry(mesh, t);
    const auto& tri = mesh.triangles()[t];
    // Parametrize along the element's local edge e: vertex e → vertex (e+1)%3.
    const Vec2 a = mesh.nodes()[tri[e]], b = mesh.nodes()[tri[(e + 1) % 3]];
    const double len = (b - a).norm();
    q.normal = mesh.outward_normal(i);
    q.edge = i;
    q.triangle = t;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      const double s = rule.points[k];
      std::array<double, 3> lam{0.0, 0.0, 0.0};
      lam[e] = 1.0 - s;
      lam[(e + 1) % 3] = s;
      q.x = (1.0 - s) * a + s * b;
      q.w = rule.weights[k] * len;
      eval_basis(V.order(), lam, g.grad_lambda, q);
      f(i, t, static_cast<const BoundaryPoint&>(q));
    }
  }
}

/// Σ c_i φ_i and Σ c_i ∇φ_i at a point.
inline double field_value(const FeSpace& V, const Vector& c, std::size_t t, const QuadPoint& q) {
  const auto& d = V.element_dofs(t);
  double v = 0.0;
  for (int i = 0; i < q.n; ++i) v += c[d[i]] * q.phi[i];
  return v;
}
inline Vec2 field_gradient(const FeSpace& V, const Vector& c, std::size_t t, const QuadPoint& q) {
  const auto& d = V.element_dofs(t);
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < q.n; ++i) g += c[d[i]] * q.dphi[i];
  return g;
}

using ElementMatrix = Eigen::Matrix<double, 6, 6>;
using ElementVector = Eigen::Matrix<double, 6, 1>;

/// Generic volume assembly; kernel(t, q, Ke) accumulates into the local matrix.
template <typename K>
SparseMatrix assemble_matrix(const FeSpace& V, const QuadratureRule& rule, K&& kernel) {
  std::vector<Eigen::Triplet<double>> trip;
  const int n = V.local_count();
  trip.reserve(V.mesh().num_triangles() * n * n);
  ElementMatrix Ke;
  std::size_t current = static_cast<std::size_t>(-1);
  auto flush = [&](std::size_t t) {
    const auto& d = V.element_dofs(t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) trip.emplace_back(d[i], d[j], Ke(i, j));
  };
  for_each_quad_point(V, rule, [&](std::size_t t, const QuadPoint& q) {
    if (t != current) {
      if (current != static_cast<std::size_t>(-1)) flush(current);
      Ke.setZero();
      current = t;
    }
    kernel(t, q, Ke);
  });
  if (current != static_cast<std::size_t>(-1)) flush(current);
  SparseMatrix A(V.dof_count(), V.dof_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

template <typename K>
Vector assemble_vector(const FeSpace& V, const QuadratureRule& rule, K&& kernel) {
  Vector F = Vector::Zero(V.dof_count());
  ElementVector Fe;
  std::size_t current = static_cast<std::size_t>(-1);
  auto flush = [&](std::size_t t) {
    const auto& d = V.element_dofs(t);
    for (int i = 0; i < V.local_count(); ++i) F[d[i]] += Fe(i);
  };
  for_each_quad_point(V, rule, [&](std::size_t t, const QuadPoint& q) {
    if (t != current) {
      if (current != static_cast<std::size_t>(-1)) flush(current);
      Fe.setZero();
      current = t;
    }
    kernel(t, q, Fe);
  });
  if (current != static_cast<std::size_t>(-1)) flush(current);
  return F;
}

template <typename K>
SparseMatrix assemble_boundary_matrix(const FeSpace& V, const EdgeRule& rule, int marker, K&& kernel) {
  std::vector<Eigen::Triplet<double>> trip;
  const int n = V.local_count();
  for_each_boundary_point(V, rule, marker, [&](std::size_t, int t, const BoundaryPoint& q) {
    ElementMatrix Ke = ElementMatrix::Zero();
    kernel(t, q, Ke);
    const auto& d = V.element_dofs(t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (Ke(i, j) != 0.0) trip.emplace_back(d[i], d[j], Ke(i, j));
  });
  SparseMatrix A(V.dof_count(), V.dof_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

template <typename K>
Vector assemble_boundary_vector(const FeSpace& V, const EdgeRule& rule, int marker, K&& kernel) {
  Vector F = Vector::Zero(V.dof_count());
  for_each_boundary_point(V, rule, marker, [&](std::size_t, int t, const BoundaryPoint& q) {
    ElementVector Fe = ElementVector::Zero();
    kernel(t, q, Fe);
    const auto& d = V.element_dofs(t);
    for (int i = 0; i < V.local_count(); ++i) F[d[i]] += Fe(i);
  });
  return F;
}

using ScalarFn = std::function<double(const Vec2&)>;
using MatrixFn = std::function<Mat2(const Vec2&)>;

/// ∫ coeff ∇φ_j · ∇φ_i
SparseMatrix assemble_diffusion(const FeSpace& V, const MatrixFn& coeff,
                                const QuadratureRule& rule = triangle_rule(kDefaultVolumeDegree));
/// ∫ w φ_j φ_i
SparseMatrix assemble_mass(const FeSpace& V, const ScalarFn& weight,
                           const QuadratureRule& rule = triangle_rule(kDefaultVolumeDegree));
/// ∫_{∂Ω ∩ marker} w φ_j φ_i
SparseMatrix assemble_boundary_mass(const FeSpace& V, int marker, const ScalarFn& weight,
                                    const EdgeRule& rule = edge_rule(kDefaultEdgeDegree));
/// ∫ f φ_i
Vector assemble_load(const FeSpace& V, const ScalarFn& f,
                     const QuadratureRule& rule = triangle_rule(kDefaultVolumeDegree));
/// ∫_{∂Ω ∩ marker} g φ_i
Vector assemble_boundary_load(const FeSpace& V, int marker, const ScalarFn& g,
                              const EdgeRule& rule = edge_rule(kDefaultEdgeDegree));

struct LinearSystem {
  SparseMatrix A;
  Vector b;
  std::vector<int> constrained;
  std::vector<double> values;
  bool symmetric = false;
};

/// Symmetric elimination of the dofs on `marker` with prescribed values.
/// Constrained rows and columns are zeroed, the diagonal set to 1 and the
/// right-hand side adjusted. Applying it twice changes nothing.
LinearSystem& apply_dirichlet(LinearSystem& sys, const FeSpace& V, int marker, const ScalarFn& value);
LinearSystem& apply_dirichlet_dofs(LinearSystem& sys, const std::vector<int>& dofs,
                                   const std::vector<double>& values);

/// Zeroes rows and columns of the listed dofs and puts 1 on their diagonal.
void eliminate_dofs(SparseMatrix& A, const std::vector<char>& mask);

/// Direct sparse solve: LDLᵀ with AMD ordering when symmetric, LU otherwise.
/// Throws SingularSystem if factorization fails or the residual exceeds
/// 1e-10 (‖b‖ + 1).
Vector solve(const LinearSystem& sys);
Vector solve(const SparseMatrix& A, const Vector& b, bool symmetric);

/// Factorization kept for repeated right-hand sides.
class Factorization {
 public:
  Factorization(const SparseMatrix& A, bool symmetric);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;
  Vector solve(const Vector& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Nodal / edge-midpoint interpolation.
Vector interpolate(const FeSpace& V, const ScalarFn& f);

/// In-element evaluation at barycentric coordinates (must lie in the element).
double eval_field(const FeSpace& V, const Vector& c, std::size_t t, const std::array<double, 3>& bary);
Vec2 eval_gradient(const FeSpace& V, const Vector& c, std::size_t t, const std::array<double, 3>& bary);

/// ‖v‖_{L²(Ω)} by quadrature.
double l2_norm(const FeSpace& V, const Vector& v,
               const QuadratureRule& rule = triangle_rule(kDefaultVolumeDegree));

/// ‖v − f‖_{L²(Ω)} for an analytic f.
double l2_error(const FeSpace& V, const Vector& v, const ScalarFn& f,
                const QuadratureRule& rule = triangle_rule(kDefaultVolumeDegree + 2));

}  // namespace shapegrad
