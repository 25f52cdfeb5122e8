#pragma once

// Backward-Euler discretization of u_t − div(M∇u) = f, u = 0 on ∂Ω,
// u(0) = g, and the shape sensitivity of the fully discrete cost.
//
// Unknowns are the sequence u_0, …, u_N on full dof vectors. u_0 is the
// L² projection of g, then (M + Δt K_k) u_k = M u_{k−1} + Δt F_k with K_k, F_k
// taken at t_k = kΔt. Index 0 of every sequence below belongs to the initial
// condition: the adjoint stores its multiplier q there.

#include <vector>

#include "shapegrad/elliptic.hpp"

namespace shapegrad {

enum class ParabolicCost {
  tracking,    // ½ Σ_k Δt ∫ (u_k − u_d(t_k))²
  final_time,  // ½ ∫ (u_N − u_d(T))²
};

struct ParabolicData {
  MatrixFunction M = constant_matrix(Mat2::Identity());
  TimeFunction f = steady(constant_function(0.0));
  ScalarFunction g = constant_function(0.0);
  TimeFunction ud = steady(constant_function(0.0));
  double T = 1.0;
  int steps = 64;
  ParabolicCost cost = ParabolicCost::tracking;

  double dt() const { return T / steps; }
  double time(int k) const { return k * dt(); }
  /// T > 0, steps ≥ 1, M(t_k, ·) symmetric positive definite on the mesh.
  void validate(const FeSpace& V) const;
};

using TimeSeries = std::vector<Vector>;

/// Σ_k a_k · b_k
double pairing(const TimeSeries& a, const TimeSeries& b);

TimeSeries parabolic_solve(const FeSpace& V, const ParabolicData& data);
double parabolic_cost(const FeSpace& V, const ParabolicData& data, const TimeSeries& u);
/// ∂J/∂u_k tested with φ_i; entry 0 is zero.
TimeSeries parabolic_B(const FeSpace& V, const ParabolicData& data, const TimeSeries& u);
/// Backward march (M + ΔtK_k) p_k = M p_{k+1} − B_k, then M q = M p_1.
TimeSeries parabolic_adjoint(const FeSpace& V, const ParabolicData& data, const TimeSeries& u);
/// Shape derivative of each discrete equation at fixed u.
TimeSeries parabolic_L(const FeSpace& V, const ParabolicData& data, const TimeSeries& u, const ThetaField& theta);
double parabolic_dB(const FeSpace& V, const ParabolicData& data, const TimeSeries& u, const ThetaField& theta);
TimeSeries parabolic_material(const FeSpace& V, const ParabolicData& data, const TimeSeries& u,
                              const ThetaField& theta);

/// Sampled tensors, summed over time steps.
ShapeTensors parabolic_shape_tensors(const FeSpace& V, const ParabolicData& data, const TimeSeries& u,
                                     const TimeSeries& p);
/// Σ_k ∫ div θ (u_k − u_{k−1}) p_k, the part of the discrete derivative left
/// by the difference quotient in time.
double parabolic_dt_pairing(const FeSpace& V, const TimeSeries& u, const TimeSeries& p, const ThetaField& theta);
/// Tensor terms plus the time-difference pairing.
DerivativeTerms parabolic_derivative(const FeSpace& V, const ParabolicData& data, const TimeSeries& u,
                                     const TimeSeries& p, const VectorField& theta, VelocityMode mode);

/// The space-time operator 𝒜 acting on a sequence, and its transpose.
TimeSeries space_time_apply(const FeSpace& V, const ParabolicData& data, const TimeSeries& w);
TimeSeries space_time_apply_transpose(const FeSpace& V, const ParabolicData& data, const TimeSeries& z);

}  // namespace shapegrad
