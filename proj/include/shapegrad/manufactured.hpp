#pragma once

// Shape-derivative tensors built from analytic fields, for the two examples
// whose states need H² regularity (a distributional Poisson state with an
// L² cost, and a Poisson state with a Hessian cost). Each comes with the
// un-tensorized integrand so the tensor algebra can be checked directly.

#include "shapegrad/functions.hpp"
#include "shapegrad/shape_assembly.hpp"

namespace shapegrad {

/// Analytic u, p, h with derivatives, and a cost integrand F(x, r).
struct ManufacturedFields {
  ScalarFunction u;
  ScalarFunction p;
  ScalarFunction h;
  NonlinearFunction F;
};

/// u = (1 − |x|²)/4, p = −2u, a quadratic h and F = (r − u_d)² with a quadratic u_d.
ManufacturedFields default_manufactured_fields();

/// Tensors for the L²-state example: S₀ = ∇ₓF + (Δp − p)∇h,
/// S₁ = 2(u − h)D²p + [h(Δp − p) − uΔp + F]I, S₂ = (u − h)∇p ⊗ I,
/// S₀,Γ = −∂ₙp∇h, S₁,Γ = −h∂ₙp(I − 2n⊗n).
ShapeTensors prop5_tensors(const ManufacturedFields& fields, const Mesh& mesh);

/// The same derivative from its integrand before tensorization.
double prop5_raw(const ManufacturedFields& fields, const Mesh& mesh, const VectorField& theta);

/// Tensors for the Hessian-cost example with f := −Δu: S₀ = −p∇f,
/// S₁ = 2pD²u − 2(D²u)² + ½|D²u|²I, S₂ = −∇u ⊗ D²u + p∇u ⊗ I.
ShapeTensors prop6_tensors(const ManufacturedFields& fields, const Mesh& mesh);

double prop6_raw(const ManufacturedFields& fields, const Mesh& mesh, const VectorField& theta);

/// ∫_Ω ∇ₓF(x, u)·θ + F(x, u) div θ.
double cost_transport_derivative(const ManufacturedFields& fields, const Mesh& mesh, const VectorField& theta);

/// ∫_Ω F(T_s(x), u(x)) ξ(s) with T_s integrated pointwise.
double cost_transport_value(const ManufacturedFields& fields, const Mesh& mesh, const VectorField& theta, double s,
                            int steps = 32);

/// ∫_Ω F(x, u(x)).
double manufactured_cost(const ManufacturedFields& fields, const Mesh& mesh);

}  // namespace shapegrad
