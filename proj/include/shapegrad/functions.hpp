#pragma once

// Named catalogs of analytic data functions (coefficients, sources, targets).
// Every entry carries closed-form derivatives so that shape-derivative
// assembly never has to difference data numerically.

#include <functional>
#include <string>
#include <vector>

#include "shapegrad/tensor.hpp"

namespace shapegrad {

/// Parsed "name p1 p2 ..." catalog reference.
struct CatalogSpec {
  std::string name;
  std::vector<double> params;

  static CatalogSpec parse(const std::string& text);
  std::string str() const;
};

/// x ↦ φ(x) with gradient and Hessian.
struct ScalarFunction {
  std::string name;
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> grad;
  std::function<Mat2(const Vec2&)> hess;
  /// ∇(Δφ), needed where a source is defined as −Δu.
  std::function<Vec2(const Vec2&)> grad_lap;

  double operator()(const Vec2& x) const { return value(x); }
};

/// Catalog: constant c | affine a bx by | quadratic c0 cx cy cxx cxy cyy |
/// cubic c0 cx cy cxx cxy cyy cxxx cxxy cxyy cyyy | sinsin amp kx ky |
/// gaussian amp cx cy sigma
ScalarFunction make_scalar_function(const CatalogSpec& spec);
ScalarFunction constant_function(double c);

/// (t, x) ↦ φ(t, x) with spatial gradient.
struct TimeFunction {
  std::string name;
  std::function<double(double, const Vec2&)> value;
  std::function<Vec2(double, const Vec2&)> grad;
};

/// Catalog: any scalar entry (time independent) | expdecay rate <scalar entry>
/// giving e^{-rate t} φ(x).
TimeFunction make_time_function(const std::string& text);
TimeFunction steady(const ScalarFunction& f);

/// (t, x) ↦ M(t, x), symmetric, with spatial derivative DM_ijk = ∂_k M_ij.
struct MatrixFunction {
  std::string name;
  std::function<Mat2(double, const Vec2&)> value;
  std::function<Tensor3_2(double, const Vec2&)> grad;
  /// True when M does not depend on t.
  bool steady_in_time = true;
};

/// Catalog: constant m11 m12 m22 | modulated m11 m12 m22 a bx by giving
/// (1 + a t + bx x + by y) M0.
MatrixFunction make_matrix_function(const CatalogSpec& spec);
MatrixFunction constant_matrix(const Mat2& m);

/// (x, r) ↦ F(x, r) with ∂_r F and ∇_x F.
struct NonlinearFunction {
  std::string name;
  std::function<double(const Vec2&, double)> value;
  std::function<double(const Vec2&, double)> dr;
  std::function<Vec2(const Vec2&, double)> dx;
};

/// Catalog: m_affine a c b (a + c|x|² + b r) | m_tanh a c b (a + c|x|² + b tanh r) |
/// m_algebraic a b (a + b r/√(1+r²)) | f_cubic k e eps ((k + e x₁) r + eps r³) |
/// f_sinx k e (k r + e sin x₁) | linear_r k (k r)
NonlinearFunction make_nonlinear_function(const CatalogSpec& spec);

/// F(x, r) = (r − u_d(x))².
NonlinearFunction tracking_integrand(const ScalarFunction& ud);

}  // namespace shapegrad
