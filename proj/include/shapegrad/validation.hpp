#pragma once

// Checks of an assembled shape derivative against independent computations:
// difference quotients of the cost on transported meshes, Taylor remainders
// of the pulled-back state, the duality identity and tensor/raw agreement.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapegrad/elliptic.hpp"
#include "shapegrad/parabolic.hpp"

namespace shapegrad {

/// A domain functional with whatever state machinery it has.
///
/// Problems solve their state on construction. Elliptic states are stored as
/// one-entry TimeSeries so the checks below handle both cases alike.
class ShapeProblem {
 public:
  virtual ~ShapeProblem() = default;

  virtual std::string id() const = 0;
  virtual const Mesh& mesh() const = 0;
  virtual std::size_t dof_count() const = 0;

  /// J on the reference mesh.
  virtual double cost() const = 0;
  /// J re-solved on a mesh with the reference connectivity.
  virtual double cost_on(const Mesh& mesh) const = 0;
  /// J(T_s(Ω)); negative s flows along −θ.
  virtual double transported_cost(const VectorField& theta, double s, int steps) const;

  virtual DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const = 0;
  /// What the difference quotients converge to; the assembled total by default.
  virtual double fd_reference(const VectorField& theta, VelocityMode mode) const;
  /// The same derivative from an independent, un-tensorized expression.
  virtual std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const;

  virtual bool has_state() const { return false; }
  virtual TimeSeries state() const;
  virtual TimeSeries state_on(const Mesh& mesh) const;
  virtual TimeSeries material(const VectorField& theta, VelocityMode mode) const;
  virtual TimeSeries adjoint() const;
  /// Norm used for Taylor remainders on the reference mesh.
  virtual double state_norm(const TimeSeries& w) const;
  virtual DualityReport duality(const VectorField& theta, VelocityMode mode) const;

  /// Extra named values for reports (iteration counts, alternative forms).
  virtual std::vector<std::pair<std::string, double>> diagnostics(const VectorField& theta) const;
};

/// Pure geometry: J(Ω) = |Ω| with dJ = ∫ div θ.
class AreaProblem : public ShapeProblem {
 public:
  explicit AreaProblem(Mesh mesh) : mesh_(std::move(mesh)) {}
  std::string id() const override { return "area"; }
  const Mesh& mesh() const override { return mesh_; }
  std::size_t dof_count() const override { return mesh_.num_nodes(); }
  double cost() const override { return mesh_.total_area(); }
  double cost_on(const Mesh& mesh) const override { return mesh.total_area(); }
  DerivativeTerms derivative(const VectorField& theta, VelocityMode mode) const override;
  std::optional<double> raw_derivative(const VectorField& theta, VelocityMode mode) const override;

 private:
  Mesh mesh_;
};

struct ValidationSettings {
  std::vector<double> s_list{0.02, 0.01, 0.005};
  int steps = 32;
  double fd_min_order = 1.9;
  double fd_forward_min_order = 0.9;
  double fd_rel_tol = 1e-5;
  /// Quotient errors at or below this count as exact.
  double fd_abs_tol = 1e-10;
  /// Bound on the Richardson-extrapolated gap; negative disables the check.
  double extrapolated_tol = -1.0;
  double taylor_min_order = 1.9;
  double taylor_abs_tol = 1e-10;
  double duality_tol = 1e-9;
  double dual_form_tol = 1e-12;
  VelocityMode velocity = VelocityMode::nodal_interpolant;
  int threads = 1;

  /// s_list positive and strictly decreasing, steps ≥ 1, tolerances positive.
  void validate() const;
};

struct FdRow {
  double s = 0.0;
  double j_plus = 0.0;
  double j_minus = 0.0;
  double central = 0.0;
  double central_error = 0.0;
  double central_order = 0.0;  // NaN on the first row
  double forward = 0.0;
  double forward_error = 0.0;
  double forward_order = 0.0;
  bool degenerate = false;
  bool pass = true;
};

struct FdTable {
  std::string problem;
  std::string theta;
  std::string mesh;
  std::size_t dofs = 0;
  double j0 = 0.0;
  double dJ = 0.0;
  std::vector<FdRow> rows;
  /// Richardson extrapolation of the central quotients in even powers of s.
  double extrapolated = 0.0;
  double extrapolated_gap = 0.0;
  /// Every quotient within fd_abs_tol of dJ.
  bool exact = false;
  bool pass = true;

  double observed_order() const;
  double relative_gap() const;
};

struct TaylorRow {
  double s = 0.0;
  double remainder = 0.0;
  double order = 0.0;
  bool degenerate = false;
  bool pass = true;
};

struct TaylorTable {
  std::vector<TaylorRow> rows;
  double state_norm = 0.0;
  bool pass = true;
};

struct DualFormReport {
  double tensor = 0.0;
  double raw = 0.0;
  double gap() const { return std::abs(tensor - raw) / (1.0 + std::abs(raw)); }
};

FdTable fd_shape_check(const ShapeProblem& problem, const VectorField& theta, const ValidationSettings& settings);
TaylorTable material_taylor_check(const ShapeProblem& problem, const VectorField& theta,
                                  const ValidationSettings& settings);
DualityReport duality_check(const ShapeProblem& problem, const VectorField& theta, VelocityMode mode);
std::optional<DualFormReport> dual_form_check(const ShapeProblem& problem, const VectorField& theta,
                                              VelocityMode mode);

/// Least-squares slope of log(error) against log(step). Needs ≥ 3 rows with
/// positive entries.
double estimate_order(const std::vector<std::pair<double, double>>& rows);

/// Value at h = 0 of the polynomial in h^p through the (h, value) samples,
/// i.e. repeated Richardson extrapolation for an error series in h^p, h^{2p}, …
double richardson(const std::vector<std::pair<double, double>>& samples, int p);

}  // namespace shapegrad
