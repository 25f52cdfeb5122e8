#include "shapegrad/validation.hpp"

#include <cmath>
#include <future>
#include <limits>

namespace shapegrad {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void no_state(const ShapeProblem& p) {
  throw InvalidInput("problem '" + p.id() + "' has no PDE state");
}

// Runs f(i) for i in [0, n) on up to `threads` workers; results keep index order.
template <typename R, typename F>
std::vector<R> run_indexed(std::size_t n, int threads, F&& f) {
  std::vector<R> out(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  for (std::size_t begin = 0; begin < n; begin += threads) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = begin; i < std::min(n, begin + threads); ++i)
      batch.push_back(std::async(std::launch::async, [&f, i] { return f(i); }));
    for (std::size_t i = 0; i < batch.size(); ++i) out[begin + i] = batch[i].get();
  }
  return out;
}

double pair_order(double e_prev, double e, double s_prev, double s) {
  if (!(e_prev > 0.0) || !(e > 0.0)) return kNaN;
  return std::log(e_prev / e) / std::log(s_prev / s);
}

}  // namespace

// ---------------------------------------------------------------------------
// ShapeProblem defaults

double ShapeProblem::transported_cost(const VectorField& theta, double s, int steps) const {
  if (s == 0.0 || theta.is_zero()) return cost();
  return cost_on(transport_mesh(mesh(), s < 0.0 ? theta.negated() : theta, std::abs(s), steps));
}

double ShapeProblem::fd_reference(const VectorField& theta, VelocityMode mode) const {
  return derivative(theta, mode).total();
}

std::optional<double> ShapeProblem::raw_derivative(const VectorField&, VelocityMode) const { return std::nullopt; }

TimeSeries ShapeProblem::state() const { no_state(*this); }
TimeSeries ShapeProblem::state_on(const Mesh&) const { no_state(*this); }
TimeSeries ShapeProblem::material(const VectorField&, VelocityMode) const { no_state(*this); }
TimeSeries ShapeProblem::adjoint() const { no_state(*this); }
double ShapeProblem::state_norm(const TimeSeries&) const { no_state(*this); }
DualityReport ShapeProblem::duality(const VectorField&, VelocityMode) const { no_state(*this); }

std::vector<std::pair<std::string, double>> ShapeProblem::diagnostics(const VectorField&) const { return {}; }

// ---------------------------------------------------------------------------
// Area

DerivativeTerms AreaProblem::derivative(const VectorField& theta, VelocityMode mode) const {
  ShapeTensors T;
  T.S1.assign(volume_point_count(mesh_, T.volume_degree), Mat2::Identity());
  return assemble_dJ(mesh_, T, theta, mode);
}

std::optional<double> AreaProblem::raw_derivative(const VectorField& theta, VelocityMode mode) const {
  if (theta.is_zero()) return 0.0;
  const FeSpace V(mesh_, 1);
  const ThetaField th(mesh_, theta, mode);
  double sum = 0.0;
  for_each_quad_point(V, triangle_rule(kDefaultVolumeDegree),
                      [&](std::size_t t, const QuadPoint& q) { sum += q.w * th.div(t, q); });
  return sum;
}

// ---------------------------------------------------------------------------
// Settings

void ValidationSettings::validate() const {
  if (s_list.empty()) throw InvalidInput("s_list is empty");
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    if (!(s_list[i] > 0.0)) throw InvalidInput("s_list entries must be positive");
    if (i > 0 && !(s_list[i] < s_list[i - 1])) throw InvalidInput("s_list must be strictly decreasing");
  }
  if (steps < 1) throw InvalidInput("flow steps must be at least 1");
  for (double t : {fd_rel_tol, fd_abs_tol, taylor_abs_tol, duality_tol, dual_form_tol})
    if (!(t > 0.0)) throw InvalidInput("tolerances must be positive");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
}

// ---------------------------------------------------------------------------
// Finite differences

double FdTable::observed_order() const { return rows.empty() ? kNaN : rows.back().central_order; }

double FdTable::relative_gap() const {
  return rows.empty() ? kNaN : rows.back().central_error / std::max(std::abs(dJ), 1e-300);
}

FdTable fd_shape_check(const ShapeProblem& problem, const VectorField& theta, const ValidationSettings& settings) {
  settings.validate();
  FdTable table;
  table.problem = problem.id();
  table.theta = theta.name();
  table.dofs = problem.dof_count();
  table.j0 = problem.cost();
  table.dJ = problem.fd_reference(theta, settings.velocity);

  const auto& S = settings.s_list;
  struct Pair {
    double plus = 0.0, minus = 0.0;
    bool degenerate = false;
  };
  const auto values = run_indexed<Pair>(S.size(), settings.threads, [&](std::size_t i) {
    Pair p;
    try {
      p.plus = problem.transported_cost(theta, S[i], settings.steps);
      p.minus = problem.transported_cost(theta, -S[i], settings.steps);
    } catch (const FlowDegeneracy&) {
      p.degenerate = true;
    } catch (const MeshValidationError&) {
      p.degenerate = true;
    }
    return p;
  });

  bool exact = true;
  for (std::size_t i = 0; i < S.size(); ++i) {
    FdRow r;
    r.s = S[i];
    r.degenerate = values[i].degenerate;
    if (r.degenerate) {
      r.j_plus = r.j_minus = r.central = r.central_error = r.forward = r.forward_error = kNaN;
      r.central_order = r.forward_order = kNaN;
      r.pass = false;
      exact = false;
      table.rows.push_back(r);
      continue;
    }
    r.j_plus = values[i].plus;
    r.j_minus = values[i].minus;
    r.central = (r.j_plus - r.j_minus) / (2.0 * r.s);
    r.forward = (r.j_plus - table.j0) / r.s;
    r.central_error = std::abs(r.central - table.dJ);
    r.forward_error = std::abs(r.forward - table.dJ);
    r.central_order = r.forward_order = kNaN;
    if (i > 0 && !table.rows.back().degenerate) {
      const FdRow& prev = table.rows.back();
      r.central_order = pair_order(prev.central_error, r.central_error, prev.s, r.s);
      r.forward_order = pair_order(prev.forward_error, r.forward_error, prev.s, r.s);
    }
    exact = exact && r.central_error <= settings.fd_abs_tol && r.forward_error <= settings.fd_abs_tol;
    table.rows.push_back(r);
  }

  std::vector<std::pair<double, double>> samples;
  for (const auto& r : table.rows)
    if (!r.degenerate) samples.emplace_back(r.s, r.central);
  table.extrapolated = samples.empty() ? kNaN : richardson(samples, 2);
  table.extrapolated_gap = std::abs(table.extrapolated - table.dJ);
  table.exact = exact;

  if (!exact) {
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      FdRow& r = table.rows[i];
      if (r.degenerate) continue;
      // A row whose error is already at the exactness floor cannot show an order.
      const bool central_ok = r.central_error <= settings.fd_abs_tol || r.central_order >= settings.fd_min_order;
      const bool forward_ok =
          r.forward_error <= settings.fd_abs_tol || r.forward_order >= settings.fd_forward_min_order;
      r.pass = central_ok && forward_ok;
    }
    FdRow& last = table.rows.back();
    if (!last.degenerate && last.central_error > settings.fd_abs_tol &&
        last.central_error > settings.fd_rel_tol * std::abs(table.dJ))
      last.pass = false;
    if (table.rows.size() < 2) table.rows.back().pass = table.rows.back().central_error <= settings.fd_abs_tol;
  }
  table.pass = true;
  for (const auto& r : table.rows) table.pass = table.pass && r.pass;
  if (settings.extrapolated_tol > 0.0 && !(table.extrapolated_gap <= settings.extrapolated_tol)) table.pass = false;
  return table;
}

// ---------------------------------------------------------------------------
// Taylor remainders of the pulled-back state

TaylorTable material_taylor_check(const ShapeProblem& problem, const VectorField& theta,
                                  const ValidationSettings& settings) {
  settings.validate();
  TaylorTable table;
  const TimeSeries u = problem.state();
  table.state_norm = problem.state_norm(u);
  const TimeSeries udot = theta.is_zero() ? TimeSeries{} : problem.material(theta, settings.velocity);
  const auto& S = settings.s_list;
  struct Result {
    double remainder = 0.0;
    bool degenerate = false;
  };
  const auto values = run_indexed<Result>(S.size(), settings.threads, [&](std::size_t i) {
    Result r;
    if (theta.is_zero()) return r;
    try {
      const TimeSeries us = problem.state_on(transport_mesh(problem.mesh(), theta, S[i], settings.steps));
      TimeSeries e(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) e[k] = us[k] - u[k] - S[i] * udot[k];
      r.remainder = problem.state_norm(e);
    } catch (const FlowDegeneracy&) {
      r.degenerate = true;
    } catch (const MeshValidationError&) {
      r.degenerate = true;
    }
    return r;
  });
  const double floor = settings.taylor_abs_tol * (1.0 + table.state_norm);
  bool exact = true;
  for (std::size_t i = 0; i < S.size(); ++i) {
    TaylorRow r;
    r.s = S[i];
    r.degenerate = values[i].degenerate;
    r.remainder = r.degenerate ? kNaN : values[i].remainder;
    r.order = kNaN;
    if (i > 0 && !r.degenerate && !table.rows.back().degenerate)
      r.order = pair_order(table.rows.back().remainder, r.remainder, table.rows.back().s, r.s);
    r.pass = !r.degenerate;
    exact = exact && !r.degenerate && r.remainder <= floor;
    table.rows.push_back(r);
  }
  if (!exact)
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      TaylorRow& r = table.rows[i];
      if (!r.degenerate) r.pass = r.remainder <= floor || r.order >= settings.taylor_min_order;
    }
  if (!exact && table.rows.size() < 2) table.rows.back().pass = false;
  table.pass = true;
  for (const auto& r : table.rows) table.pass = table.pass && r.pass;
  return table;
}

DualityReport duality_check(const ShapeProblem& problem, const VectorField& theta, VelocityMode mode) {
  if (theta.is_zero()) return {};
  return problem.duality(theta, mode);
}

std::optional<DualFormReport> dual_form_check(const ShapeProblem& problem, const VectorField& theta,
                                              VelocityMode mode) {
  const auto raw = problem.raw_derivative(theta, mode);
  if (!raw) return std::nullopt;
  return DualFormReport{problem.derivative(theta, mode).total(), *raw};
}

// ---------------------------------------------------------------------------
// Convergence helpers

double estimate_order(const std::vector<std::pair<double, double>>& rows) {
  if (rows.size() < 3) throw InvalidInput("estimate_order needs at least three rows");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [h, e] : rows) {
    if (!(h > 0.0) || !(e > 0.0)) throw InvalidInput("estimate_order needs positive steps and errors");
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw InvalidInput("estimate_order needs distinct steps");
  return (n * sxy - sx * sy) / den;
}

double richardson(const std::vector<std::pair<double, double>>& samples, int p) {
  // Neville's scheme in the variable z = h^p, evaluated at z = 0.
  const std::size_t n = samples.size();
  std::vector<double> z(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::pow(samples[i].first, p);
    v[i] = samples[i].second;
  }
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i) v[i] = (z[i] * v[i + 1] - z[i + m] * v[i]) / (z[i] - z[i + m]);
  return v[0];
}

}  // namespace shapegrad
