#include "shapegrad/fem.hpp"

#include <cmath>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace shapegrad {

FeSpace::FeSpace(const Mesh& mesh, int order) : mesh_(std::make_shared<const Mesh>(mesh)), order_(order) {
  if (order != 1 && order != 2) throw InvalidInput("FeSpace: order must be 1 or 2");
  const Mesh& m = *mesh_;
  coords_ = m.nodes();
  const int nv = static_cast<int>(m.num_nodes());
  if (order == 2)
    for (const auto& e : m.edges()) coords_.push_back(0.5 * (m.nodes()[e[0]] + m.nodes()[e[1]]));
  dofs_.resize(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    auto& d = dofs_[t];
    d.fill(-1);
    for (int k = 0; k < 3; ++k) d[k] = m.triangles()[t][k];
    if (order == 2)
      for (int e = 0; e < 3; ++e) d[3 + e] = nv + m.triangle_edges()[t][e];
  }
}

std::vector<char> FeSpace::boundary_mask(int marker) const {
  const Mesh& m = *mesh_;
  if (marker != kAnyMarker && !m.has_marker(marker))
    throw InvalidInput("unknown boundary marker " + std::to_string(marker));
  std::vector<char> mask(dof_count(), 0);
  for (std::size_t i = 0; i < m.boundary().size(); ++i) {
    const auto& be = m.boundary()[i];
    if (marker != kAnyMarker && be.marker != marker) continue;
    mask[be.a] = mask[be.b] = 1;
    if (order_ == 2) mask[m.num_nodes() + m.boundary_global_edge(i)] = 1;
  }
  return mask;
}

std::vector<int> FeSpace::boundary_dofs(int marker) const {
  const auto mask = boundary_mask(marker);
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(static_cast<int>(i));
  return out;
}

ElementGeometry element_geometry(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  const Vec2& a = mesh.nodes()[tri[0]];
  ElementGeometry g;
  g.x0 = a;
  g.B.col(0) = mesh.nodes()[tri[1]] - a;
  g.B.col(1) = mesh.nodes()[tri[2]] - a;
  g.det = g.B.determinant();
  const Mat2 BinvT = g.B.inverse().transpose();
  g.grad_lambda[1] = BinvT.col(0);
  g.grad_lambda[2] = BinvT.col(1);
  g.grad_lambda[0] = -g.grad_lambda[1] - g.grad_lambda[2];
  return g;
}

void eval_basis(int order, const std::array<double, 3>& lam, const std::array<Vec2, 3>& gl, QuadPoint& q) {
  q.lambda = lam;
  if (order == 1) {
    q.n = 3;
    for (int i = 0; i < 3; ++i) {
      q.phi[i] = lam[i];
      q.dphi[i] = gl[i];
    }
    return;
  }
  q.n = 6;
  for (int i = 0; i < 3; ++i) {
    q.phi[i] = lam[i] * (2.0 * lam[i] - 1.0);
    q.dphi[i] = (4.0 * lam[i] - 1.0) * gl[i];
  }
  for (int e = 0; e < 3; ++e) {
    const int a = e, b = (e + 1) % 3;
    q.phi[3 + e] = 4.0 * lam[a] * lam[b];
    q.dphi[3 + e] = 4.0 * (lam[a] * gl[b] + lam[b] * gl[a]);
  }
}

SparseMatrix assemble_diffusion(const FeSpace& V, const MatrixFn& coeff, const QuadratureRule& rule) {
  return assemble_matrix(V, rule, [&](std::size_t, const QuadPoint& q, ElementMatrix& Ke) {
    const Mat2 C = coeff(q.x);
    for (int i = 0; i < q.n; ++i)
      for (int j = 0; j < q.n; ++j) Ke(i, j) += q.w * q.dphi[i].dot(C * q.dphi[j]);
  });
}

SparseMatrix assemble_mass(const FeSpace& V, const ScalarFn& weight, const QuadratureRule& rule) {
  return assemble_matrix(V, rule, [&](std::size_t, const QuadPoint& q, ElementMatrix& Ke) {
    const double c = q.w * weight(q.x);
    for (int i = 0; i < q.n; ++i)
      for (int j = 0; j < q.n; ++j) Ke(i, j) += c * q.phi[i] * q.phi[j];
  });
}

SparseMatrix assemble_boundary_mass(const FeSpace& V, int marker, const ScalarFn& weight, const EdgeRule& rule) {
  return assemble_boundary_matrix(V, rule, marker, [&](int, const BoundaryPoint& q, ElementMatrix& Ke) {
    const double c = q.w * weight(q.x);
    for (int i = 0; i < q.n; ++i)
      for (int j = 0; j < q.n; ++j) Ke(i, j) += c * q.phi[i] * q.phi[j];
  });
}

Vector assemble_load(const FeSpace& V, const ScalarFn& f, const QuadratureRule& rule) {
  return assemble_vector(V, rule, [&](std::size_t, const QuadPoint& q, ElementVector& Fe) {
    const double c = q.w * f(q.x);
    for (int i = 0; i < q.n; ++i) Fe(i) += c * q.phi[i];
  });
}

Vector assemble_boundary_load(const FeSpace& V, int marker, const ScalarFn& g, const EdgeRule& rule) {
  return assemble_boundary_vector(V, rule, marker, [&](int, const BoundaryPoint& q, ElementVector& Fe) {
    const double c = q.w * g(q.x);
    for (int i = 0; i < q.n; ++i) Fe(i) += c * q.phi[i];
  });
}

void eliminate_dofs(SparseMatrix& A, const std::vector<char>& mask) {
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      if (mask[it.row()] || mask[it.col()]) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) A.coeffRef(static_cast<int>(i), static_cast<int>(i)) = 1.0;
}

LinearSystem& apply_dirichlet_dofs(LinearSystem& sys, const std::vector<int>& dofs, const std::vector<double>& values) {
  if (dofs.size() != values.size()) throw InvalidInput("apply_dirichlet: dof/value count mismatch");
  const auto n = static_cast<std::size_t>(sys.A.rows());
  std::vector<char> mask(n, 0);
  Vector g = Vector::Zero(static_cast<int>(n));
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    mask[dofs[k]] = 1;
    g[dofs[k]] = values[k];
  }
  // Move the known column contributions to the right-hand side first.
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.A, k); it; ++it)
      if (mask[it.col()] && !mask[it.row()]) sys.b[it.row()] -= it.value() * g[it.col()];
  eliminate_dofs(sys.A, mask);
  for (std::size_t k = 0; k < dofs.size(); ++k) sys.b[dofs[k]] = values[k];
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    sys.constrained.push_back(dofs[k]);
    sys.values.push_back(values[k]);
  }
  return sys;
}

LinearSystem& apply_dirichlet(LinearSystem& sys, const FeSpace& V, int marker, const ScalarFn& value) {
  const auto dofs = V.boundary_dofs(marker);
  std::vector<double> values(dofs.size());
  for (std::size_t k = 0; k < dofs.size(); ++k) values[k] = value(V.dof_coords()[dofs[k]]);
  return apply_dirichlet_dofs(sys, dofs, values);
}

struct Factorization::Impl {
  bool symmetric;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  SparseMatrix A;
};

Factorization::Factorization(const SparseMatrix& A, bool symmetric) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw InvalidInput("solve: matrix is not square");
  impl_->symmetric = symmetric;
  impl_->A = A;
  impl_->A.makeCompressed();
  if (symmetric) {
    impl_->ldlt.compute(impl_->A);
    if (impl_->ldlt.info() != Eigen::Success) throw SingularSystem("LDLT factorization failed");
  } else {
    impl_->lu.compute(impl_->A);
    if (impl_->lu.info() != Eigen::Success) throw SingularSystem("LU factorization failed: " + impl_->lu.lastErrorMessage());
  }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Vector Factorization::solve(const Vector& b) const {
  Vector x = impl_->symmetric ? Vector(impl_->ldlt.solve(b)) : Vector(impl_->lu.solve(b));
  const double res = (impl_->A * x - b).norm();
  if (!x.allFinite() || !(res <= 1e-10 * (b.norm() + 1.0)))
    throw SingularSystem("linear solve residual " + std::to_string(res) + " exceeds tolerance");
  return x;
}

Vector solve(const SparseMatrix& A, const Vector& b, bool symmetric) { return Factorization(A, symmetric).solve(b); }

Vector solve(const LinearSystem& sys) { return solve(sys.A, sys.b, sys.symmetric); }

Vector interpolate(const FeSpace& V, const ScalarFn& f) {
  Vector c(V.dof_count());
  for (std::size_t i = 0; i < V.dof_count(); ++i) c[i] = f(V.dof_coords()[i]);
  return c;
}

namespace {
QuadPoint point_in_element(const FeSpace& V, std::size_t t, const std::array<double, 3>& bary) {
  if (t >= V.mesh().num_triangles()) throw InvalidInput("element index out of range");
  const double sum = bary[0] + bary[1] + bary[2];
  if (std::abs(sum - 1.0) > 1e-12 || bary[0] < -1e-12 || bary[1] < -1e-12 || bary[2] < -1e-12)
    throw InvalidInput("point lies outside the element");
  const ElementGeometry g = element_geometry(V.mesh(), t);
  QuadPoint q;
  q.x = g.map(Vec2(bary[1], bary[2]));
  eval_basis(V.order(), bary, g.grad_lambda, q);
  return q;
}
}  // namespace

double eval_field(const FeSpace& V, const Vector& c, std::size_t t, const std::array<double, 3>& bary) {
  return field_value(V, c, t, point_in_element(V, t, bary));
}

Vec2 eval_gradient(const FeSpace& V, const Vector& c, std::size_t t, const std::array<double, 3>& bary) {
  return field_gradient(V, c, t, point_in_element(V, t, bary));
}

double l2_norm(const FeSpace& V, const Vector& v, const QuadratureRule& rule) {
  double sum = 0.0;
  for_each_quad_point(V, rule, [&](std::size_t t, const QuadPoint& q) {
    const double u = field_value(V, v, t, q);
    sum += q.w * u * u;
  });
  return std::sqrt(sum);
}

double l2_error(const FeSpace& V, const Vector& v, const ScalarFn& f, const QuadratureRule& rule) {
  double sum = 0.0;
  for_each_quad_point(V, rule, [&](std::size_t t, const QuadPoint& q) {
    const double e = field_value(V, v, t, q) - f(q.x);
    sum += q.w * e * e;
  });
  return std::sqrt(sum);
}

}  // namespace shapegrad
