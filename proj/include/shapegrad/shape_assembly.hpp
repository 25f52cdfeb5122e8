#pragma once

// Tensor representation of a shape derivative and its evaluation for a given θ:
//   dJ(θ) = ∫_Ω S₀·θ + S₁:Dθ + S₂∴D²θ + ∫_∂Ω S₀,Γ·θ + S₁,Γ:Dθ.

#include <vector>

#include "shapegrad/fem.hpp"
#include "shapegrad/flow.hpp"

namespace shapegrad {

/// How θ enters an assembled derivative.
///
/// `analytic` samples θ, Dθ, D²θ at each quadrature point. `nodal_interpolant`
/// replaces θ by its P1 interpolant θ_h = Σ λ_i θ(x_i), so Dθ_h is constant per
/// element and D²θ_h = 0. Moving mesh nodes along θ moves every point of the
/// discrete domain along θ_h, so this mode is the exact first variation of a
/// functional evaluated on transported meshes.
enum class VelocityMode { analytic, nodal_interpolant };

/// Tensors sampled at volume quadrature points (element-major, rule order) and
/// at boundary quadrature points (boundary-edge-major, rule order). Absent
/// terms are empty vectors.
struct ShapeTensors {
  int volume_degree = kDefaultVolumeDegree;
  int edge_degree = kDefaultEdgeDegree;
  std::vector<Vec2> S0;
  std::vector<Mat2> S1;
  std::vector<Tensor3_2> S2;
  std::vector<Vec2> S0_gamma;
  std::vector<Mat2> S1_gamma;
  /// Contract S₁,Γ with the tangential Jacobian D_Γθ instead of Dθ.
  bool s1_gamma_tangential = false;

  bool has_volume() const { return !S0.empty() || !S1.empty() || !S2.empty(); }
  bool has_boundary() const { return !S0_gamma.empty() || !S1_gamma.empty(); }
};

/// Per-term values of an assembled derivative.
struct DerivativeTerms {
  double S0 = 0.0;
  double S1 = 0.0;
  double S2 = 0.0;
  double S0_gamma = 0.0;
  double S1_gamma = 0.0;
  /// Time-stepping term of a discrete evolution problem, zero otherwise.
  double dt_pairing = 0.0;

  double volume() const { return S0 + S1 + S2; }
  double boundary() const { return S0_gamma + S1_gamma; }
  double total() const { return volume() + boundary() + dt_pairing; }
};

/// θ, Dθ, D²θ at quadrature points in either velocity mode.
class ThetaField {
 public:
  ThetaField(const Mesh& mesh, const VectorField& theta, VelocityMode mode);

  VelocityMode mode() const { return mode_; }
  const VectorField& field() const { return theta_; }

  Vec2 value(std::size_t t, const QuadPoint& q) const;
  Mat2 jac(std::size_t t, const QuadPoint& q) const;
  Tensor3_2 hess(std::size_t t, const QuadPoint& q) const;
  double div(std::size_t t, const QuadPoint& q) const { return jac(t, q).trace(); }

 private:
  VectorField theta_;
  VelocityMode mode_;
  std::vector<std::array<Vec2, 3>> vertex_values_;
  std::vector<Mat2> element_jac_;
};

/// Quadrature sum of every present term; the breakdown lists each integral.
DerivativeTerms assemble_dJ(const Mesh& mesh, const ShapeTensors& tensors, const VectorField& theta,
                            VelocityMode mode = VelocityMode::analytic);

/// Number of volume / boundary quadrature points the tensors must carry.
std::size_t volume_point_count(const Mesh& mesh, int degree);
std::size_t boundary_point_count(const Mesh& mesh, int degree);

}  // namespace shapegrad
