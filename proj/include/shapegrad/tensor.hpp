#pragma once

// Fixed-dimension first, second and third order tensors and their
// contraction/transpose algebra. Vectors and matrices are Eigen fixed-size
// types; third-order tensors use the index convention (i,j,k) where, for a
// vector field G, (D^2 G)_ijk = d_j d_k G_i.

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "shapegrad/errors.hpp"

namespace shapegrad {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

using Vec2 = Vec<2>;
using Mat2 = Mat<2>;

template <int D>
class Tensor3 {
 public:
  Tensor3() { data_.fill(0.0); }

  static Tensor3 zero() { return Tensor3(); }

  double& operator()(int i, int j, int k) { return data_[(i * D + j) * D + k]; }
  double operator()(int i, int j, int k) const { return data_[(i * D + j) * D + k]; }

  Tensor3& operator+=(const Tensor3& o) {
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  Tensor3& operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
  }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  const std::array<double, D * D * D>& data() const { return data_; }
  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::array<double, D * D * D> data_;
};

using Tensor3_2 = Tensor3<2>;

/// Throws InvalidInput unless every entry is finite.
template <typename Derived>
const Derived& require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string("non-finite entries in ") + what);
  return m.derived();
}
template <int D>
const Tensor3<D>& require_finite(const Tensor3<D>& t, const char* what) {
  if (!t.all_finite()) throw InvalidInput(std::string("non-finite entries in ") + what);
  return t;
}

/// S : T
template <int D>
double double_dot(const Mat<D>& S, const Mat<D>& T) {
  return S.cwiseProduct(T).sum();
}

/// S ∴ T, full contraction over all three indices.
template <int D>
double triple_dot(const Tensor3<D>& S, const Tensor3<D>& T) {
  double sum = 0.0;
  for (std::size_t n = 0; n < S.data().size(); ++n) sum += S.data()[n] * T.data()[n];
  return sum;
}

/// T_ijk = S_kij. Applying it three times gives back S.
template <int D>
Tensor3<D> transpose3(const Tensor3<D>& S) {
  Tensor3<D> T;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k) T(i, j, k) = S(k, i, j);
  return T;
}

/// (S b c)_i = S_ijk b_j c_k
template <int D>
Vec<D> apply3(const Tensor3<D>& S, const Vec<D>& b, const Vec<D>& c) {
  Vec<D> out = Vec<D>::Zero();
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k) out(i) += S(i, j, k) * b(j) * c(k);
  return out;
}

/// (S c)_ij = S_ijk c_k
template <int D>
Mat<D> matvec3(const Tensor3<D>& S, const Vec<D>& c) {
  Mat<D> out = Mat<D>::Zero();
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k) out(i, j) += S(i, j, k) * c(k);
  return out;
}

template <int D>
Mat<D> outer(const Vec<D>& a, const Vec<D>& b) {
  return a * b.transpose();
}

/// [a ⊗ T]_ijk = a_i T_jk
template <int D>
Tensor3<D> outer_vm(const Vec<D>& a, const Mat<D>& T) {
  Tensor3<D> out;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k) out(i, j, k) = a(i) * T(j, k);
  return out;
}

/// Vector Laplacian of a field from its Hessian tensor: (Δθ)_i = Σ_j θ_i,jj.
template <int D>
Vec<D> vector_laplacian(const Tensor3<D>& hess) {
  Vec<D> out = Vec<D>::Zero();
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) out(i) += hess(i, j, j);
  return out;
}

namespace detail {
template <int D>
void require_symmetric(const Mat<D>& H) {
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidInput("psi_hess is not symmetric");
}
}  // namespace detail

/// Rate of change at s = 0 of the transported Hessian [D²(ψ∘T_s⁻¹)]∘T_s:
/// -Dθᵀ D²ψ - D²ψ Dθ - (D²θ)ᵀ∇ψ.
template <int D>
Mat<D> transported_hessian_rate(const Vec<D>& psi_grad, const Mat<D>& psi_hess,
                                const Mat<D>& theta_jac, const Tensor3<D>& theta_hess) {
  detail::require_symmetric<D>(psi_hess);
  return -theta_jac.transpose() * psi_hess - psi_hess * theta_jac -
         matvec3<D>(transpose3<D>(theta_hess), psi_grad);
}

/// Rate of change at s = 0 of the transported Laplacian, -2 D²ψ : Dθ - Δθ·∇ψ.
/// Computed both as the trace of transported_hessian_rate and in closed form.
template <int D>
double transported_laplacian_rate(const Vec<D>& psi_grad, const Mat<D>& psi_hess,
                                  const Mat<D>& theta_jac, const Tensor3<D>& theta_hess) {
  const double via_trace =
      transported_hessian_rate<D>(psi_grad, psi_hess, theta_jac, theta_hess).trace();
  const double closed = -2.0 * double_dot<D>(psi_hess, theta_jac) -
                        vector_laplacian<D>(theta_hess).dot(psi_grad);
  const double scale = std::max({1.0, std::abs(via_trace), std::abs(closed)});
  if (std::abs(via_trace - closed) > 1e-12 * scale)
    throw std::logic_error("transported Laplacian: trace and closed form disagree");
  return closed;
}

}  // namespace shapegrad
