#pragma once

// Three elliptic model problems with their state, adjoint, material derivative
// and shape-derivative tensors:
//   Robin:      −div(M∇u) = f in Ω, M∇u·n + βu = g on ∂Ω, J = ½∫|∇u|².
//   Quasilinear: −div(m(x,u)∇u) + f(x,u) = g, u = 0 on ∂Ω, J = ½∫(u − u_d)².
//   Dirichlet energy: −Δu = f, u = 0 on ∂Ω, J = ∫|∇u|².
//
// Vectors named L and B hold ⟨L(u), φ_i⟩ and ⟨B(u), φ_i⟩ for every basis
// function, so ⟨L(u), p⟩ = L·p. Derivatives take a VelocityMode; see
// shape_assembly.hpp for what the nodal mode means.

#include <cmath>
#include <vector>

#include "shapegrad/fem.hpp"
#include "shapegrad/functions.hpp"
#include "shapegrad/shape_assembly.hpp"

namespace shapegrad {

/// First variation of the discrete cost and of the state equation along θ.
struct DualityReport {
  double lhs = 0.0;  // ⟨L(u), p⟩
  double rhs = 0.0;  // ⟨B(u), u̇⟩
  double abs_gap() const { return std::abs(lhs - rhs); }
  double rel_gap() const { return abs_gap() / (1.0 + std::abs(lhs)); }
};

// ---------------------------------------------------------------------------
// Robin

struct RobinData {
  Mat2 M = Mat2::Identity();
  ScalarFunction beta = constant_function(1.0);
  ScalarFunction f = constant_function(0.0);
  ScalarFunction g = constant_function(0.0);

  /// M symmetric positive definite, β > 0 at every boundary quadrature point.
  void validate(const FeSpace& V) const;
};

SparseMatrix robin_operator(const FeSpace& V, const RobinData& data);
Vector robin_solve(const FeSpace& V, const RobinData& data);
double robin_cost(const FeSpace& V, const Vector& u);
Vector robin_B(const FeSpace& V, const Vector& u);
Vector robin_adjoint(const FeSpace& V, const RobinData& data, const Vector& u);
Vector robin_L(const FeSpace& V, const RobinData& data, const Vector& u, const ThetaField& theta);
double robin_dB(const FeSpace& V, const Vector& u, const ThetaField& theta);
Vector robin_material(const FeSpace& V, const RobinData& data, const Vector& u, const ThetaField& theta);
ShapeTensors robin_shape_tensors(const FeSpace& V, const RobinData& data, const Vector& u, const Vector& p);

// ---------------------------------------------------------------------------
// Quasilinear

struct QuasilinearData {
  NonlinearFunction m;
  NonlinearFunction f;
  ScalarFunction g = constant_function(0.0);
  ScalarFunction ud = constant_function(0.0);
  double c1 = 1.0;
  double c2 = 1e-4;
  double c3 = 1.0;
  double r_check = 10.0;
  int scan_x = 32;
  int scan_r = 64;

  /// Samples c₁ ≤ m, c₂ ≤ min(∂_r f, ∂_r m), max(∂_r f, ∂_r m) ≤ c₃ on a grid
  /// over the mesh bounding box × [−r_check, r_check]. Throws InvalidInput
  /// naming the first violated bound.
  void check_monotonicity(const Mesh& mesh) const;
};

struct NewtonResult {
  Vector u;
  std::vector<double> residuals;  // ‖R(u_k)‖ before each update, then the final one
  int iterations = 0;
};

inline constexpr int kNewtonMaxIter = 25;

Vector quasilinear_residual(const FeSpace& V, const QuasilinearData& data, const Vector& u);
/// Linearized operator A(u) with boundary rows and columns eliminated.
SparseMatrix quasilinear_jacobian(const FeSpace& V, const QuasilinearData& data, const Vector& u);
NewtonResult quasilinear_newton(const FeSpace& V, const QuasilinearData& data);
Vector quasilinear_solve(const FeSpace& V, const QuasilinearData& data);
double quasilinear_cost(const FeSpace& V, const QuasilinearData& data, const Vector& u);
Vector quasilinear_B(const FeSpace& V, const QuasilinearData& data, const Vector& u);
Vector quasilinear_adjoint(const FeSpace& V, const QuasilinearData& data, const Vector& u);
Vector quasilinear_L(const FeSpace& V, const QuasilinearData& data, const Vector& u, const ThetaField& theta);
double quasilinear_dB(const FeSpace& V, const QuasilinearData& data, const Vector& u, const ThetaField& theta);
Vector quasilinear_material(const FeSpace& V, const QuasilinearData& data, const Vector& u,
                            const ThetaField& theta);
ShapeTensors quasilinear_shape_tensors(const FeSpace& V, const QuasilinearData& data, const Vector& u,
                                       const Vector& p);

// ---------------------------------------------------------------------------
// Dirichlet energy

struct DirichletEnergyData {
  ScalarFunction f = constant_function(1.0);
};

Vector dirichlet_energy_solve(const FeSpace& V, const DirichletEnergyData& data);
double dirichlet_energy_cost(const FeSpace& V, const Vector& u);
Vector dirichlet_energy_B(const FeSpace& V, const Vector& u);
Vector dirichlet_energy_adjoint(const FeSpace& V, const Vector& u);
Vector dirichlet_energy_L(const FeSpace& V, const DirichletEnergyData& data, const Vector& u,
                          const ThetaField& theta);
double dirichlet_energy_dB(const FeSpace& V, const Vector& u, const ThetaField& theta);
Vector dirichlet_energy_material(const FeSpace& V, const DirichletEnergyData& data, const Vector& u,
                                 const ThetaField& theta);
ShapeTensors dirichlet_energy_shape_tensors(const FeSpace& V, const DirichletEnergyData& data, const Vector& u);
/// ∫_∂Ω |∂ₙu|² θ·n with one-sided gradient traces and analytic θ.
double dirichlet_energy_boundary_form(const FeSpace& V, const Vector& u, const VectorField& theta);

struct DirichletEnergySuite {
  Vector u;
  Vector p;
  Vector u_dot;
  ShapeTensors tensors;
  double dJ_volume = 0.0;
  double dJ_boundary = 0.0;
};

DirichletEnergySuite dirichlet_energy_suite(const FeSpace& V, const DirichletEnergyData& data,
                                            const VectorField& theta,
                                            VelocityMode mode = VelocityMode::analytic);

/// Sets the listed entries to zero.
void zero_masked(Vector& v, const std::vector<char>& mask);

}  // namespace shapegrad
