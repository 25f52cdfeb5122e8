#pragma once

// Perturbation fields θ, the flow T_s they generate and the Jacobian
// quantities ξ, ξ_Γ and 𝓜(s, Q) derived from it.

#include <functional>
#include <string>

#include "shapegrad/functions.hpp"
#include "shapegrad/tensor.hpp"

namespace shapegrad {

class Mesh;

struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};

  bool contains(const Vec2& x) const {
    return x(0) >= lo(0) && x(0) <= hi(0) && x(1) >= lo(1) && x(1) <= hi(1);
  }
  bool contains(const Box& b) const { return contains(b.lo) && contains(b.hi); }
  bool strictly_contains(const Vec2& x) const {
    return x(0) > lo(0) && x(0) < hi(0) && x(1) > lo(1) && x(1) < hi(1);
  }
  bool intersects(const Box& b) const {
    return lo(0) <= b.hi(0) && b.lo(0) <= hi(0) && lo(1) <= b.hi(1) && b.lo(1) <= hi(1);
  }
};

/// A C² vector field with compact support in a box, with analytic Dθ and D²θ.
///
/// Catalog fields are multiplied by a cutoff ρ(x) = ρ₁(x₁)ρ₂(x₂) where each
/// factor rises from 0 to 1 over `margin` inside the box faces along the
/// quintic smoothstep 6t⁵ − 15t⁴ + 10t³, so ρ, ∇ρ and D²ρ vanish on the faces.
class VectorField {
 public:
  using EvalFn = std::function<Vec2(const Vec2&)>;
  using JacFn = std::function<Mat2(const Vec2&)>;
  using HessFn = std::function<Tensor3_2(const Vec2&)>;

  VectorField() = default;
  VectorField(std::string name, Box support, Vec2 margin, EvalFn eval, JacFn jac, HessFn hess);

  const std::string& name() const { return name_; }
  const Box& support_box() const { return support_; }
  bool is_zero() const { return zero_; }

  Vec2 eval(const Vec2& x) const;
  Mat2 jac(const Vec2& x) const;
  Tensor3_2 hess(const Vec2& x) const;
  double div(const Vec2& x) const { return jac(x).trace(); }

  /// Cutoff factor and its derivatives.
  double cutoff(const Vec2& x) const;
  Vec2 cutoff_grad(const Vec2& x) const;
  Mat2 cutoff_hess(const Vec2& x) const;

  VectorField negated() const { return scaled(-1.0); }
  VectorField scaled(double a) const;
  /// a·this + other (supports merged into their bounding box).
  VectorField axpy(double a, const VectorField& other) const;

 private:
  std::string name_ = "zero";
  Box support_;
  Vec2 margin_{1.0, 1.0};
  bool zero_ = true;
  bool has_cutoff_ = true;
  EvalFn base_eval_;
  JacFn base_jac_;
  HessFn base_hess_;

  void ramp(int axis, double x, double& r, double& dr, double& ddr) const;
};

/// Catalog: zero | constant cx cy | linear a11 a12 a21 a22 b1 b2 (Ax + b) |
/// rotation cx cy omega | bump cx cy r ax ay (a·(1 − |x−c|²/r²)³₊) |
/// tensor_bump cx cy rx ry ax ay (a·Π(1 − z_i²)³₊) |
/// quadratic q10..q15 q20..q25 (θ_i = q_i0 + q_i1 x + q_i2 y + q_i3 x² + q_i4 xy + q_i5 y²).
/// margin <= 0 selects 10% of the box extent per axis.
VectorField make_vector_field(const CatalogSpec& spec, const Box& support, double margin = 0.0);

struct FlowState {
  Vec2 position{0.0, 0.0};
  Mat2 jacobian = Mat2::Identity();
  double s = 0.0;
};

/// Classical RK4 on x' = θ(x), J' = Dθ(x)J over [0, s] with `steps` uniform steps.
/// Throws FlowDegeneracy if det J ≤ 0 after any step.
FlowState advect(const VectorField& theta, double s, const Vec2& x0, int steps = 32);

/// Position only, same scheme.
Vec2 advect_position(const VectorField& theta, double s, const Vec2& x0, int steps = 32);

/// ξ(s) = det DT_s.
double xi(const FlowState& state);

/// 𝓜(s, Q) = ξ DT_s⁻¹ Q DT_s⁻ᵀ.
Mat2 m_of_s(const FlowState& state, const Mat2& Q);

/// 𝓜′(0, Q) = div θ Q − Dθ Q − Q Dθᵀ, from a Jacobian value.
Mat2 m_prime0(const Mat2& theta_jac, const Mat2& Q);
Mat2 m_prime0(const VectorField& theta, const Vec2& x, const Mat2& Q);

/// ξ_Γ(s) = det DT_s |DT_s⁻ᵀ n|.
double xi_gamma(const FlowState& state, const Vec2& n);

/// div_Γ θ = div θ − Dθ n·n.
double div_gamma(const Mat2& theta_jac, const Vec2& n);
double div_gamma(const VectorField& theta, const Vec2& x, const Vec2& n);

/// Tangential Jacobian D_Γθ = Dθ − (Dθ n) ⊗ n.
Mat2 jac_gamma(const Mat2& theta_jac, const Vec2& n);

/// Nodes advected by T_s (negative s uses the reversed field). Connectivity is
/// kept; an inverted triangle raises FlowDegeneracy with its index.
Mesh transport_mesh(const Mesh& mesh, const VectorField& theta, double s, int steps = 32);

}  // namespace shapegrad
