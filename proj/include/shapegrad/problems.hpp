#pragma once

// Concrete ShapeProblem implementations and their construction from a RunConfig.

#include <memory>

#include "shapegrad/config.hpp"
#include "shapegrad/manufactured.hpp"
#include "shapegrad/validation.hpp"

namespace shapegrad {

/// Shared plumbing for problems with a finite element state.
class FeProblem : public ShapeProblem {
 public:
  FeProblem(const Mesh& mesh, int order) : V_(mesh, order), order_(order) {}
  const Mesh& mesh() const override { return V_.mesh(); }
  std::size_t dof_count() const override { return V_.dof_count(); }
  bool has_state() const override { return true; }
  const FeSpace& space() const { return V_; }
  double state_norm(const TimeSeries& w) const override;

 protected:
  FeSpace V_;
  int order_;
};

class RobinProblem : public FeProblem {
 public:
  RobinProblem(const Mesh& mesh, int order, RobinData data);
  std::string id() const override { return "robin"; }
  double cost() const override;
  double cost_on(const Mesh& mesh) const override;
  DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const override;
  std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries state() const override { return {u_}; }
  TimeSeries state_on(const Mesh& mesh) const override;
  TimeSeries material(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries adjoint() const override { return {p_}; }
  DualityReport duality(const VectorField& theta, VelocityMode mode) const override;

 private:
  RobinData data_;
  Vector u_, p_;
  ShapeTensors tensors_;
};

class QuasilinearProblem : public FeProblem {
 public:
  /// Runs the monotonicity scan first; InvalidInput names a violated bound.
  QuasilinearProblem(const Mesh& mesh, int order, QuasilinearData data);
  std::string id() const override { return "quasilinear"; }
  double cost() const override;
  double cost_on(const Mesh& mesh) const override;
  DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const override;
  std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries state() const override { return {u_}; }
  TimeSeries state_on(const Mesh& mesh) const override;
  TimeSeries material(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries adjoint() const override { return {p_}; }
  DualityReport duality(const VectorField& theta, VelocityMode mode) const override;
  std::vector<std::pair<std::string, double>> diagnostics(const VectorField& theta) const override;
  const NewtonResult& newton() const { return newton_; }

 private:
  QuasilinearData data_;
  NewtonResult newton_;
  Vector u_, p_;
  ShapeTensors tensors_;
};

class DirichletEnergyProblem : public FeProblem {
 public:
  DirichletEnergyProblem(const Mesh& mesh, int order, DirichletEnergyData data);
  std::string id() const override { return "dirichlet_energy"; }
  double cost() const override;
  double cost_on(const Mesh& mesh) const override;
  DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const override;
  std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries state() const override { return {u_}; }
  TimeSeries state_on(const Mesh& mesh) const override;
  TimeSeries material(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries adjoint() const override { return {p_}; }
  DualityReport duality(const VectorField& theta, VelocityMode mode) const override;
  /// Includes the boundary form ∫|∂ₙu|²θ·n.
  std::vector<std::pair<std::string, double>> diagnostics(const VectorField& theta) const override;

 private:
  DirichletEnergyData data_;
  Vector u_, p_;
  ShapeTensors tensors_;
};

class ParabolicProblem : public FeProblem {
 public:
  ParabolicProblem(const Mesh& mesh, int order, ParabolicData data);
  std::string id() const override;
  double cost() const override;
  double cost_on(const Mesh& mesh) const override;
  DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const override;
  std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries state() const override { return u_; }
  TimeSeries state_on(const Mesh& mesh) const override;
  TimeSeries material(const VectorField& theta, VelocityMode mode) const override;
  TimeSeries adjoint() const override { return p_; }
  /// √(Σ_k Δt ‖w_k‖²) over all time levels.
  double state_norm(const TimeSeries& w) const override;
  DualityReport duality(const VectorField& theta, VelocityMode mode) const override;
  const ParabolicData& data() const { return data_; }

 private:
  ParabolicData data_;
  TimeSeries u_, p_;
  ShapeTensors tensors_;
};

/// Tensor forms built from analytic fields. Difference quotients use the
/// transported cost ∫F(T_s(x), u(x))ξ(s) and its exact derivative. θ is always
/// sampled analytically here.
class ManufacturedProblem : public ShapeProblem {
 public:
  enum class Variant { prop5, prop6 };
  ManufacturedProblem(Mesh mesh, ManufacturedFields fields, Variant variant);
  std::string id() const override;
  const Mesh& mesh() const override { return mesh_; }
  std::size_t dof_count() const override { return mesh_.num_nodes(); }
  double cost() const override;
  double cost_on(const Mesh& mesh) const override;
  double transported_cost(const VectorField& theta, double s, int steps) const override;
  DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const override;
  double fd_reference(const VectorField& theta, VelocityMode mode) const override;
  std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const override;

 private:
  Mesh mesh_;
  ManufacturedFields fields_;
  Variant variant_;
  ShapeTensors tensors_;
};

/// Builds the configured problem on `mesh`, solving its state.
std::unique_ptr<ShapeProblem> make_problem(const RunConfig& config, const Mesh& mesh);

}  // namespace shapegrad
