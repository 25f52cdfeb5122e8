#include "shapegrad/parabolic.hpp"

#include <memory>

namespace shapegrad {

namespace {

const QuadratureRule& rule() {
  static const QuadratureRule r = triangle_rule(kDefaultVolumeDegree);
  return r;
}

SparseMatrix interior_projector(const std::vector<char>& mask) {
  SparseMatrix D(mask.size(), mask.size());
  D.reserve(Eigen::VectorXi::Constant(mask.size(), 1));
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) D.insert(i, i) = 1.0;
  return D;
}

// Matrices of one discretization. M0 is the eliminated mass matrix used for
// the initial projection, Mc the mass matrix restricted to interior rows and
// columns that couples consecutive steps, A_k = M + ΔtK_k eliminated.
class StepOperators {
 public:
  StepOperators(const FeSpace& V, const ParabolicData& d) : d_(d), mask_(V.boundary_mask()) {
    const SparseMatrix M = assemble_mass(V, [](const Vec2&) { return 1.0; }, rule());
    const SparseMatrix D = interior_projector(mask_);
    Mc_ = D * M * D;
    M0_ = M;
    eliminate_dofs(M0_, mask_);
    const int count = d.M.steady_in_time ? 1 : d.steps;
    for (int i = 0; i < count; ++i) {
      const double t = d.time(d.M.steady_in_time ? d.steps : i + 1);
      SparseMatrix A = M + d.dt() * assemble_diffusion(V, [&](const Vec2& x) { return d.M.value(t, x); }, rule());
      eliminate_dofs(A, mask_);
      A_.push_back(std::move(A));
    }
    factors_.resize(A_.size());
  }

  const SparseMatrix& M0() const { return M0_; }
  const SparseMatrix& Mc() const { return Mc_; }
  const SparseMatrix& A(int k) const { return A_[index(k)]; }
  const std::vector<char>& mask() const { return mask_; }

  Vector solve_initial(const Vector& b) {
    if (!m0_factor_) m0_factor_ = std::make_unique<Factorization>(M0_, true);
    return m0_factor_->solve(b);
  }
  Vector solve_step(int k, const Vector& b) {
    auto& f = factors_[index(k)];
    if (!f) f = std::make_unique<Factorization>(A_[index(k)], true);
    return f->solve(b);
  }

 private:
  std::size_t index(int k) const { return d_.M.steady_in_time ? 0 : static_cast<std::size_t>(k - 1); }

  const ParabolicData& d_;
  std::vector<char> mask_;
  SparseMatrix M0_, Mc_;
  std::vector<SparseMatrix> A_;
  std::unique_ptr<Factorization> m0_factor_;
  std::vector<std::unique_ptr<Factorization>> factors_;
};

Vector masked(Vector v, const std::vector<char>& mask) {
  zero_masked(v, mask);
  return v;
}

Vector source_at(const FeSpace& V, const ParabolicData& d, int k) {
  const double t = d.time(k);
  return assemble_load(V, [&](const Vec2& x) { return d.f.value(t, x); }, rule());
}

bool cost_active(const ParabolicData& d, int k) { return d.cost == ParabolicCost::tracking || k == d.steps; }
double cost_weight(const ParabolicData& d) { return d.cost == ParabolicCost::tracking ? d.dt() : 1.0; }

}  // namespace

void ParabolicData::validate(const FeSpace& V) const {
  if (!(T > 0.0)) throw InvalidInput("parabolic: final time must be positive");
  if (steps < 1) throw InvalidInput("parabolic: need at least one time step");
  for (int k = 0; k <= steps; ++k) {
    const double t = time(k);
    for_each_quad_point(V, rule(), [&](std::size_t, const QuadPoint& q) {
      const Mat2 m = M.value(t, q.x);
      if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * m.cwiseAbs().maxCoeff() || !(m(0, 0) > 0.0 && m.determinant() > 0.0))
        throw InvalidInput("parabolic: M is not symmetric positive definite at t = " + std::to_string(t));
    });
  }
}

double pairing(const TimeSeries& a, const TimeSeries& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].dot(b[k]);
  return s;
}

TimeSeries parabolic_solve(const FeSpace& V, const ParabolicData& d) {
  d.validate(V);
  StepOperators ops(V, d);
  TimeSeries u(d.steps + 1);
  u[0] = ops.solve_initial(masked(assemble_load(V, d.g.value, rule()), ops.mask()));
  for (int k = 1; k <= d.steps; ++k)
    u[k] = ops.solve_step(k, ops.Mc() * u[k - 1] + d.dt() * masked(source_at(V, d, k), ops.mask()));
  return u;
}

double parabolic_cost(const FeSpace& V, const ParabolicData& d, const TimeSeries& u) {
  double sum = 0.0;
  for (int k = 1; k <= d.steps; ++k) {
    if (!cost_active(d, k)) continue;
    const double t = d.time(k);
    for_each_quad_point(V, rule(), [&](std::size_t e, const QuadPoint& q) {
      const double r = field_value(V, u[k], e, q) - d.ud.value(t, q.x);
      sum += 0.5 * cost_weight(d) * q.w * r * r;
    });
  }
  return sum;
}

TimeSeries parabolic_B(const FeSpace& V, const ParabolicData& d, const TimeSeries& u) {
  const auto mask = V.boundary_mask();
  TimeSeries B(d.steps + 1, Vector::Zero(V.dof_count()));
  for (int k = 1; k <= d.steps; ++k) {
    if (!cost_active(d, k)) continue;
    const double t = d.time(k);
    B[k] = assemble_vector(V, rule(), [&](std::size_t e, const QuadPoint& q, ElementVector& Fe) {
      const double r = cost_weight(d) * (field_value(V, u[k], e, q) - d.ud.value(t, q.x));
      for (int i = 0; i < q.n; ++i) Fe(i) += q.w * r * q.phi[i];
    });
    zero_masked(B[k], mask);
  }
  return B;
}

TimeSeries parabolic_adjoint(const FeSpace& V, const ParabolicData& d, const TimeSeries& u) {
  StepOperators ops(V, d);
  const TimeSeries B = parabolic_B(V, d, u);
  TimeSeries p(d.steps + 1);
  p[d.steps] = ops.solve_step(d.steps, -B[d.steps]);
  for (int k = d.steps - 1; k >= 1; --k) p[k] = ops.solve_step(k, ops.Mc() * p[k + 1] - B[k]);
  p[0] = ops.solve_initial(ops.Mc() * p[1]);
  return p;
}

TimeSeries parabolic_L(const FeSpace& V, const ParabolicData& d, const TimeSeries& u, const ThetaField& theta) {
  const auto mask = V.boundary_mask();
  const double dt = d.dt();
  TimeSeries L(d.steps + 1);
  L[0] = assemble_vector(V, rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
    const double div = theta.div(t, q);
    const double v = field_value(V, u[0], t, q) * div - d.g.grad(q.x).dot(theta.value(t, q)) - d.g(q.x) * div;
    for (int i = 0; i < q.n; ++i) Fe(i) += q.w * v * q.phi[i];
  });
  zero_masked(L[0], mask);
  for (int k = 1; k <= d.steps; ++k) {
    const double tk = d.time(k);
    L[k] = assemble_vector(V, rule(), [&](std::size_t t, const QuadPoint& q, ElementVector& Fe) {
      const Vec2 th = theta.value(t, q);
      const Mat2 J = theta.jac(t, q);
      const double div = J.trace();
      const Mat2 Mk = d.M.value(tk, q.x);
      const Vec2 flux = dt * (m_prime0(J, Mk) + matvec3<2>(d.M.grad(tk, q.x), th)) * field_gradient(V, u[k], t, q);
      const double src = (field_value(V, u[k], t, q) - field_value(V, u[k - 1], t, q)) * div -
                         dt * (d.f.grad(tk, q.x).dot(th) + d.f.value(tk, q.x) * div);
      for (int i = 0; i < q.n; ++i) Fe(i) += q.w * (flux.dot(q.dphi[i]) + src * q.phi[i]);
    });
    zero_masked(L[k], mask);
  }
  return L;
}

double parabolic_dB(const FeSpace& V, const ParabolicData& d, const TimeSeries& u, const ThetaField& theta) {
  double sum = 0.0;
  for (int k = 1; k <= d.steps; ++k) {
    if (!cost_active(d, k)) continue;
    const double tk = d.time(k);
    for_each_quad_point(V, rule(), [&](std::size_t t, const QuadPoint& q) {
      const double r = field_value(V, u[k], t, q) - d.ud.value(tk, q.x);
      sum += cost_weight(d) * q.w *
             (-r * d.ud.grad(tk, q.x).dot(theta.value(t, q)) + 0.5 * r * r * theta.div(t, q));
    });
  }
  return sum;
}

TimeSeries parabolic_material(const FeSpace& V, const ParabolicData& d, const TimeSeries& u,
                              const ThetaField& theta) {
  StepOperators ops(V, d);
  const TimeSeries L = parabolic_L(V, d, u, theta);
  TimeSeries w(d.steps + 1);
  w[0] = ops.solve_initial(-L[0]);
  for (int k = 1; k <= d.steps; ++k) w[k] = ops.solve_step(k, ops.Mc() * w[k - 1] - L[k]);
  return w;
}

ShapeTensors parabolic_shape_tensors(const FeSpace& V, const ParabolicData& d, const TimeSeries& u,
                                     const TimeSeries& p) {
  ShapeTensors T;
  T.volume_degree = kDefaultVolumeDegree;
  const double dt = d.dt();
  for_each_quad_point(V, rule(), [&](std::size_t t, const QuadPoint& q) {
    const double g = d.g(q.x);
    const double q0 = field_value(V, p[0], t, q);
    T.S0.push_back(-q0 * d.g.grad(q.x));
    T.S1.push_back((field_value(V, u[0], t, q) - g) * q0 * Mat2::Identity());
  });
  for (int k = 1; k <= d.steps; ++k) {
    const double tk = d.time(k);
    const bool tracked = cost_active(d, k);
    std::size_t i = 0;
    for_each_quad_point(V, rule(), [&](std::size_t t, const QuadPoint& q) {
      const Vec2 gu = field_gradient(V, u[k], t, q), gp = field_gradient(V, p[k], t, q);
      const double pk = field_value(V, p[k], t, q);
      const Mat2 Mk = d.M.value(tk, q.x);
      const Tensor3_2 DM = d.M.grad(tk, q.x);
      const double fk = d.f.value(tk, q.x);
      // (DM θ)∇u·∇p = v·θ
      Vec2 v = Vec2::Zero();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c) v(a) += DM(b, c, a) * gp(b) * gu(c);
      Vec2 s0 = dt * (v - pk * d.f.grad(tk, q.x));
      Mat2 s1 = dt * (-outer<2>(gp, Mk * gu) - outer<2>(gu, Mk * gp) + ((Mk * gu).dot(gp) - pk * fk) * Mat2::Identity());
      if (tracked) {
        const double r = field_value(V, u[k], t, q) - d.ud.value(tk, q.x);
        s0 -= cost_weight(d) * r * d.ud.grad(tk, q.x);
        s1 += cost_weight(d) * 0.5 * r * r * Mat2::Identity();
      }
      T.S0[i] += s0;
      T.S1[i] += s1;
      ++i;
    });
  }
  return T;
}

double parabolic_dt_pairing(const FeSpace& V, const TimeSeries& u, const TimeSeries& p, const ThetaField& theta) {
  double sum = 0.0;
  for (std::size_t k = 1; k < u.size(); ++k)
    for_each_quad_point(V, rule(), [&](std::size_t t, const QuadPoint& q) {
      sum += q.w * theta.div(t, q) * (field_value(V, u[k], t, q) - field_value(V, u[k - 1], t, q)) *
             field_value(V, p[k], t, q);
    });
  return sum;
}

DerivativeTerms parabolic_derivative(const FeSpace& V, const ParabolicData& d, const TimeSeries& u,
                                     const TimeSeries& p, const VectorField& theta, VelocityMode mode) {
  DerivativeTerms out = assemble_dJ(V.mesh(), parabolic_shape_tensors(V, d, u, p), theta, mode);
  if (!theta.is_zero()) out.dt_pairing = parabolic_dt_pairing(V, u, p, ThetaField(V.mesh(), theta, mode));
  return out;
}

TimeSeries space_time_apply(const FeSpace& V, const ParabolicData& d, const TimeSeries& w) {
  StepOperators ops(V, d);
  TimeSeries out(d.steps + 1);
  out[0] = ops.M0() * w[0];
  for (int k = 1; k <= d.steps; ++k) out[k] = ops.A(k) * w[k] - ops.Mc() * w[k - 1];
  return out;
}

TimeSeries space_time_apply_transpose(const FeSpace& V, const ParabolicData& d, const TimeSeries& z) {
  StepOperators ops(V, d);
  TimeSeries out(d.steps + 1);
  const SparseMatrix McT = ops.Mc().transpose();
  out[0] = SparseMatrix(ops.M0().transpose()) * z[0] - McT * z[1];
  for (int k = 1; k <= d.steps; ++k) {
    out[k] = SparseMatrix(ops.A(k).transpose()) * z[k];
    if (k < d.steps) out[k] -= McT * z[k + 1];
  }
  return out;
}

}  // namespace shapegrad
