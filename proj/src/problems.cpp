#include "shapegrad/problems.hpp"

#include <cmath>

namespace shapegrad {

namespace {

ScalarFunction scalar(const RunConfig& c, const std::string& key, const std::string& fallback) {
  return make_scalar_function(CatalogSpec::parse(c.text(key, fallback)));
}

ThetaField field(const FeSpace& V, const VectorField& theta, VelocityMode mode) {
  return ThetaField(V.mesh(), theta, mode);
}

}  // namespace

double FeProblem::state_norm(const TimeSeries& w) const {
  double sum = 0.0;
  for (const auto& v : w) sum += std::pow(l2_norm(V_, v), 2);
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

RobinProblem::RobinProblem(const Mesh& mesh, int order, RobinData data) : FeProblem(mesh, order), data_(std::move(data)) {
  u_ = robin_solve(V_, data_);
  p_ = robin_adjoint(V_, data_, u_);
  tensors_ = robin_shape_tensors(V_, data_, u_, p_);
}

double RobinProblem::cost() const { return robin_cost(V_, u_); }

double RobinProblem::cost_on(const Mesh& mesh) const {
  const FeSpace W(mesh, order_);
  return robin_cost(W, robin_solve(W, data_));
}

DerivativeTerms RobinProblem::derivative(const VectorField& theta, VelocityMode mode) const {
  return assemble_dJ(mesh(), tensors_, theta, mode);
}

std::optional<double> RobinProblem::raw_derivative(const VectorField& theta, VelocityMode mode) const {
  if (theta.is_zero()) return 0.0;
  const ThetaField th = field(V_, theta, mode);
  return robin_dB(V_, u_, th) + robin_L(V_, data_, u_, th).dot(p_);
}

TimeSeries RobinProblem::state_on(const Mesh& mesh) const { return {robin_solve(FeSpace(mesh, order_), data_)}; }

TimeSeries RobinProblem::material(const VectorField& theta, VelocityMode mode) const {
  return {robin_material(V_, data_, u_, field(V_, theta, mode))};
}

DualityReport RobinProblem::duality(const VectorField& theta, VelocityMode mode) const {
  const ThetaField th = field(V_, theta, mode);
  const Vector udot = robin_material(V_, data_, u_, th);
  return {robin_L(V_, data_, u_, th).dot(p_), robin_B(V_, u_).dot(udot)};
}

// ---------------------------------------------------------------------------

QuasilinearProblem::QuasilinearProblem(const Mesh& mesh, int order, QuasilinearData data)
    : FeProblem(mesh, order), data_(std::move(data)) {
  data_.check_monotonicity(mesh);
  newton_ = quasilinear_newton(V_, data_);
  u_ = newton_.u;
  p_ = quasilinear_adjoint(V_, data_, u_);
  tensors_ = quasilinear_shape_tensors(V_, data_, u_, p_);
}

double QuasilinearProblem::cost() const { return quasilinear_cost(V_, data_, u_); }

double QuasilinearProblem::cost_on(const Mesh& mesh) const {
  const FeSpace W(mesh, order_);
  return quasilinear_cost(W, data_, quasilinear_solve(W, data_));
}

DerivativeTerms QuasilinearProblem::derivative(const VectorField& theta, VelocityMode mode) const {
  return assemble_dJ(mesh(), tensors_, theta, mode);
}

std::optional<double> QuasilinearProblem::raw_derivative(const VectorField& theta, VelocityMode mode) const {
  if (theta.is_zero()) return 0.0;
  const ThetaField th = field(V_, theta, mode);
  return quasilinear_dB(V_, data_, u_, th) + quasilinear_L(V_, data_, u_, th).dot(p_);
}

TimeSeries QuasilinearProblem::state_on(const Mesh& mesh) const {
  return {quasilinear_solve(FeSpace(mesh, order_), data_)};
}

TimeSeries QuasilinearProblem::material(const VectorField& theta, VelocityMode mode) const {
  return {quasilinear_material(V_, data_, u_, field(V_, theta, mode))};
}

DualityReport QuasilinearProblem::duality(const VectorField& theta, VelocityMode mode) const {
  const ThetaField th = field(V_, theta, mode);
  const Vector udot = quasilinear_material(V_, data_, u_, th);
  return {quasilinear_L(V_, data_, u_, th).dot(p_), quasilinear_B(V_, data_, u_).dot(udot)};
}

std::vector<std::pair<std::string, double>> QuasilinearProblem::diagnostics(const VectorField&) const {
  return {{"newton_iterations", newton_.iterations}, {"newton_final_residual", newton_.residuals.back()}};
}

// ---------------------------------------------------------------------------

DirichletEnergyProblem::DirichletEnergyProblem(const Mesh& mesh, int order, DirichletEnergyData data)
    : FeProblem(mesh, order), data_(std::move(data)) {
  u_ = dirichlet_energy_solve(V_, data_);
  p_ = dirichlet_energy_adjoint(V_, u_);
  tensors_ = dirichlet_energy_shape_tensors(V_, data_, u_);
}

double DirichletEnergyProblem::cost() const { return dirichlet_energy_cost(V_, u_); }

double DirichletEnergyProblem::cost_on(const Mesh& mesh) const {
  const FeSpace W(mesh, order_);
  return dirichlet_energy_cost(W, dirichlet_energy_solve(W, data_));
}

DerivativeTerms DirichletEnergyProblem::derivative(const VectorField& theta, VelocityMode mode) const {
  return assemble_dJ(mesh(), tensors_, theta, mode);
}

std::optional<double> DirichletEnergyProblem::raw_derivative(const VectorField& theta, VelocityMode mode) const {
  if (theta.is_zero()) return 0.0;
  const ThetaField th = field(V_, theta, mode);
  return dirichlet_energy_dB(V_, u_, th) + dirichlet_energy_L(V_, data_, u_, th).dot(p_);
}

TimeSeries DirichletEnergyProblem::state_on(const Mesh& mesh) const {
  return {dirichlet_energy_solve(FeSpace(mesh, order_), data_)};
}

TimeSeries DirichletEnergyProblem::material(const VectorField& theta, VelocityMode mode) const {
  return {dirichlet_energy_material(V_, data_, u_, field(V_, theta, mode))};
}

DualityReport DirichletEnergyProblem::duality(const VectorField& theta, VelocityMode mode) const {
  const ThetaField th = field(V_, theta, mode);
  const Vector udot = dirichlet_energy_material(V_, data_, u_, th);
  return {dirichlet_energy_L(V_, data_, u_, th).dot(p_), dirichlet_energy_B(V_, u_).dot(udot)};
}

std::vector<std::pair<std::string, double>> DirichletEnergyProblem::diagnostics(const VectorField& theta) const {
  const double inf = (p_ + 2.0 * u_).lpNorm<Eigen::Infinity>();
  return {{"adjoint_plus_2u_max", inf},
          {"boundary_form", theta.is_zero() ? 0.0 : dirichlet_energy_boundary_form(V_, u_, theta)},
          {"volume_form_analytic", assemble_dJ(mesh(), tensors_, theta, VelocityMode::analytic).total()}};
}

// ---------------------------------------------------------------------------

ParabolicProblem::ParabolicProblem(const Mesh& mesh, int order, ParabolicData data)
    : FeProblem(mesh, order), data_(std::move(data)) {
  u_ = parabolic_solve(V_, data_);
  p_ = parabolic_adjoint(V_, data_, u_);
  tensors_ = parabolic_shape_tensors(V_, data_, u_, p_);
}

std::string ParabolicProblem::id() const {
  return data_.cost == ParabolicCost::tracking ? "parabolic_j1" : "parabolic_j2";
}

double ParabolicProblem::cost() const { return parabolic_cost(V_, data_, u_); }

double ParabolicProblem::cost_on(const Mesh& mesh) const {
  const FeSpace W(mesh, order_);
  return parabolic_cost(W, data_, parabolic_solve(W, data_));
}

DerivativeTerms ParabolicProblem::derivative(const VectorField& theta, VelocityMode mode) const {
  DerivativeTerms out = assemble_dJ(mesh(), tensors_, theta, mode);
  if (!theta.is_zero()) out.dt_pairing = parabolic_dt_pairing(V_, u_, p_, field(V_, theta, mode));
  return out;
}

std::optional<double> ParabolicProblem::raw_derivative(const VectorField& theta, VelocityMode mode) const {
  if (theta.is_zero()) return 0.0;
  const ThetaField th = field(V_, theta, mode);
  return parabolic_dB(V_, data_, u_, th) + pairing(parabolic_L(V_, data_, u_, th), p_);
}

TimeSeries ParabolicProblem::state_on(const Mesh& mesh) const { return parabolic_solve(FeSpace(mesh, order_), data_); }

TimeSeries ParabolicProblem::material(const VectorField& theta, VelocityMode mode) const {
  return parabolic_material(V_, data_, u_, field(V_, theta, mode));
}

double ParabolicProblem::state_norm(const TimeSeries& w) const { return std::sqrt(data_.dt()) * FeProblem::state_norm(w); }

DualityReport ParabolicProblem::duality(const VectorField& theta, VelocityMode mode) const {
  const ThetaField th = field(V_, theta, mode);
  return {pairing(parabolic_L(V_, data_, u_, th), p_),
          pairing(parabolic_B(V_, data_, u_), parabolic_material(V_, data_, u_, th))};
}

// ---------------------------------------------------------------------------

ManufacturedProblem::ManufacturedProblem(Mesh mesh, ManufacturedFields fields, Variant variant)
    : mesh_(std::move(mesh)), fields_(std::move(fields)), variant_(variant) {
  tensors_ = variant_ == Variant::prop5 ? prop5_tensors(fields_, mesh_) : prop6_tensors(fields_, mesh_);
}

std::string ManufacturedProblem::id() const {
  return variant_ == Variant::prop5 ? "prop5_manufactured" : "prop6_manufactured";
}

double ManufacturedProblem::cost() const { return manufactured_cost(fields_, mesh_); }
double ManufacturedProblem::cost_on(const Mesh& mesh) const { return manufactured_cost(fields_, mesh); }

double ManufacturedProblem::transported_cost(const VectorField& theta, double s, int steps) const {
  return cost_transport_value(fields_, mesh_, theta, s, steps);
}

DerivativeTerms ManufacturedProblem::derivative(const VectorField& theta, VelocityMode) const {
  return assemble_dJ(mesh_, tensors_, theta, VelocityMode::analytic);
}

double ManufacturedProblem::fd_reference(const VectorField& theta, VelocityMode) const {
  return cost_transport_derivative(fields_, mesh_, theta);
}

std::optional<double> ManufacturedProblem::raw_derivative(const VectorField& theta, VelocityMode) const {
  if (theta.is_zero()) return 0.0;
  return variant_ == Variant::prop5 ? prop5_raw(fields_, mesh_, theta) : prop6_raw(fields_, mesh_, theta);
}

// ---------------------------------------------------------------------------

std::unique_ptr<ShapeProblem> make_problem(const RunConfig& c, const Mesh& mesh) {
  const std::string& id = c.problem;
  if (id == "area") return std::make_unique<AreaProblem>(mesh);
  if (id == "robin") {
    RobinData d;
    const CatalogSpec spec = CatalogSpec::parse(c.text("M", "constant 1 0 1"));
    const MatrixFunction M = make_matrix_function(spec);
    if (spec.name != "constant")
      throw InvalidInput("data.M: the Robin problem needs a constant matrix");
    d.M = M.value(0.0, Vec2::Zero());
    d.beta = scalar(c, "beta", "constant 1");
    d.f = scalar(c, "f", "constant 0");
    d.g = scalar(c, "g", "constant 0");
    return std::make_unique<RobinProblem>(mesh, c.order, std::move(d));
  }
  if (id == "quasilinear") {
    QuasilinearData d;
    d.m = make_nonlinear_function(CatalogSpec::parse(c.text("m", "m_algebraic 2 1")));
    d.f = make_nonlinear_function(CatalogSpec::parse(c.text("f", "f_sinx 1 0.1")));
    d.g = scalar(c, "g", "constant 0");
    d.ud = scalar(c, "ud", "constant 0");
    d.c1 = c.number("c1", d.c1);
    d.c2 = c.number("c2", d.c2);
    d.c3 = c.number("c3", d.c3);
    d.r_check = c.number("r_check", d.r_check);
    return std::make_unique<QuasilinearProblem>(mesh, c.order, std::move(d));
  }
  if (id == "dirichlet_energy") {
    DirichletEnergyData d;
    d.f = scalar(c, "f", "constant 1");
    return std::make_unique<DirichletEnergyProblem>(mesh, c.order, std::move(d));
  }
  if (id == "parabolic_j1" || id == "parabolic_j2") {
    ParabolicData d;
    d.M = make_matrix_function(CatalogSpec::parse(c.text("M", "constant 1 0 1")));
    d.f = make_time_function(c.text("f", "constant 0"));
    d.g = scalar(c, "g", "constant 0");
    d.ud = make_time_function(c.text("ud", "constant 0"));
    d.T = c.number("T", d.T);
    d.steps = static_cast<int>(c.number("steps", d.steps));
    d.cost = id == "parabolic_j1" ? ParabolicCost::tracking : ParabolicCost::final_time;
    return std::make_unique<ParabolicProblem>(mesh, c.order, std::move(d));
  }
  ManufacturedFields f = default_manufactured_fields();
  if (c.has("u")) f.u = scalar(c, "u", "");
  if (c.has("p")) f.p = scalar(c, "p", "");
  if (c.has("h")) f.h = scalar(c, "h", "");
  if (c.has("ud")) f.F = tracking_integrand(scalar(c, "ud", ""));
  return std::make_unique<ManufacturedProblem>(
      mesh, std::move(f),
      id == "prop5_manufactured" ? ManufacturedProblem::Variant::prop5 : ManufacturedProblem::Variant::prop6);
}

}  // namespace shapegrad
