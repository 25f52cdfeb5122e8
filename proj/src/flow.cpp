#include "shapegrad/flow.hpp"

#include <cmath>

#include "shapegrad/mesh.hpp"

namespace shapegrad {

namespace {

// Smoothstep S(t) = 6t⁵ − 15t⁴ + 10t³ on [0, 1] with derivatives.
void smoothstep(double t, double& s, double& ds, double& dds) {
  if (t <= 0.0) {
    s = ds = dds = 0.0;
    return;
  }
  if (t >= 1.0) {
    s = 1.0;
    ds = dds = 0.0;
    return;
  }
  const double t2 = t * t;
  s = t2 * t * (10.0 + t * (-15.0 + 6.0 * t));
  ds = 30.0 * t2 * (1.0 - t) * (1.0 - t);
  dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

Box merge(const Box& a, const Box& b) {
  return Box{a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
}

void require_params(const CatalogSpec& spec, std::size_t n) {
  if (spec.params.size() != n)
    throw InvalidInput("vector field '" + spec.name + "' expects " + std::to_string(n) +
                       " parameters, got " + std::to_string(spec.params.size()));
}

// Radial polynomial bump (1 − t)³ with t = |x − c|²/r², times a constant vector.
struct RadialBump {
  Vec2 c, a;
  double r2;

  double profile(const Vec2& x, Vec2& grad, Mat2& hess) const {
    const Vec2 d = x - c;
    const double t = d.squaredNorm() / r2;
    if (t >= 1.0) {
      grad.setZero();
      hess.setZero();
      return 0.0;
    }
    const double q = 1.0 - t;
    // φ(t) = q³, φ' = −3q², φ'' = 6q; ∇t = 2d/r², D²t = 2I/r².
    const Vec2 gt = 2.0 * d / r2;
    grad = -3.0 * q * q * gt;
    hess = 6.0 * q * gt * gt.transpose() - 3.0 * q * q * (2.0 / r2) * Mat2::Identity();
    return q * q * q;
  }
};

// Product bump Π (1 − z_i²)³ with z_i = (x_i − c_i)/r_i.
struct ProductBump {
  Vec2 c, r, a;

  double profile(const Vec2& x, Vec2& grad, Mat2& hess) const {
    double v[2], d1[2], d2[2];
    for (int i = 0; i < 2; ++i) {
      const double z = (x(i) - c(i)) / r(i);
      if (std::abs(z) >= 1.0) {
        grad.setZero();
        hess.setZero();
        return 0.0;
      }
      const double q = 1.0 - z * z;
      v[i] = q * q * q;
      d1[i] = -6.0 * z * q * q / r(i);
      d2[i] = (-6.0 * q * q + 24.0 * z * z * q) / (r(i) * r(i));
    }
    grad << d1[0] * v[1], v[0] * d1[1];
    hess << d2[0] * v[1], d1[0] * d1[1], d1[0] * d1[1], v[0] * d2[1];
    return v[0] * v[1];
  }
};

template <typename Bump>
VectorField bump_field(const std::string& name, const Box& support, const Vec2& margin, Bump b) {
  auto eval = [b](const Vec2& x) {
    Vec2 g;
    Mat2 h;
    return Vec2(b.profile(x, g, h) * b.a);
  };
  auto jac = [b](const Vec2& x) {
    Vec2 g;
    Mat2 h;
    b.profile(x, g, h);
    return Mat2(b.a * g.transpose());
  };
  auto hess = [b](const Vec2& x) {
    Vec2 g;
    Mat2 h;
    b.profile(x, g, h);
    Tensor3_2 t;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) t(i, j, k) = b.a(i) * h(j, k);
    return t;
  };
  return VectorField(name, support, margin, eval, jac, hess);
}

}  // namespace

VectorField::VectorField(std::string name, Box support, Vec2 margin, EvalFn eval, JacFn jac,
                         HessFn hess)
    : name_(std::move(name)),
      support_(support),
      margin_(margin),
      zero_(false),
      base_eval_(std::move(eval)),
      base_jac_(std::move(jac)),
      base_hess_(std::move(hess)) {
  for (int i = 0; i < 2; ++i) {
    if (!(support_.hi(i) > support_.lo(i))) throw InvalidInput("support box has empty extent");
    if (!(margin_(i) > 0.0) || 2.0 * margin_(i) > support_.hi(i) - support_.lo(i))
      throw InvalidInput("cutoff margin must be positive and at most half the support extent");
  }
}

void VectorField::ramp(int axis, double x, double& r, double& dr, double& ddr) const {
  const double lo = support_.lo(axis), hi = support_.hi(axis), w = margin_(axis);
  if (x <= lo || x >= hi) {
    r = dr = ddr = 0.0;
    return;
  }
  if (x < lo + w) {
    smoothstep((x - lo) / w, r, dr, ddr);
    dr /= w;
    ddr /= w * w;
    return;
  }
  if (x > hi - w) {
    smoothstep((hi - x) / w, r, dr, ddr);
    dr = -dr / w;
    ddr /= w * w;
    return;
  }
  r = 1.0;
  dr = ddr = 0.0;
}

double VectorField::cutoff(const Vec2& x) const {
  if (!has_cutoff_) return 1.0;
  double r0, d0, dd0, r1, d1, dd1;
  ramp(0, x(0), r0, d0, dd0);
  ramp(1, x(1), r1, d1, dd1);
  return r0 * r1;
}

Vec2 VectorField::cutoff_grad(const Vec2& x) const {
  if (!has_cutoff_) return Vec2::Zero();
  double r0, d0, dd0, r1, d1, dd1;
  ramp(0, x(0), r0, d0, dd0);
  ramp(1, x(1), r1, d1, dd1);
  return Vec2(d0 * r1, r0 * d1);
}

Mat2 VectorField::cutoff_hess(const Vec2& x) const {
  if (!has_cutoff_) return Mat2::Zero();
  double r0, d0, dd0, r1, d1, dd1;
  ramp(0, x(0), r0, d0, dd0);
  ramp(1, x(1), r1, d1, dd1);
  Mat2 h;
  h << dd0 * r1, d0 * d1, d0 * d1, r0 * dd1;
  return h;
}

Vec2 VectorField::eval(const Vec2& x) const {
  if (zero_ || !support_.strictly_contains(x)) return Vec2::Zero();
  return cutoff(x) * base_eval_(x);
}

Mat2 VectorField::jac(const Vec2& x) const {
  if (zero_ || !support_.strictly_contains(x)) return Mat2::Zero();
  if (!has_cutoff_) return base_jac_(x);
  // D(ρθ_b) = ρ Dθ_b + θ_b ⊗ ∇ρ
  return cutoff(x) * base_jac_(x) + base_eval_(x) * cutoff_grad(x).transpose();
}

Tensor3_2 VectorField::hess(const Vec2& x) const {
  if (zero_ || !support_.strictly_contains(x)) return Tensor3_2::zero();
  if (!has_cutoff_) return base_hess_(x);
  const double rho = cutoff(x);
  const Vec2 g = cutoff_grad(x);
  const Mat2 H = cutoff_hess(x);
  const Vec2 tb = base_eval_(x);
  const Mat2 Jb = base_jac_(x);
  Tensor3_2 t = base_hess_(x);
  t *= rho;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        t(i, j, k) += g(j) * Jb(i, k) + g(k) * Jb(i, j) + tb(i) * H(j, k);
  return t;
}

VectorField VectorField::scaled(double a) const {
  if (zero_) return *this;
  VectorField out = *this;
  auto e = base_eval_;
  auto j = base_jac_;
  auto h = base_hess_;
  out.base_eval_ = [e, a](const Vec2& x) { return Vec2(a * e(x)); };
  out.base_jac_ = [j, a](const Vec2& x) { return Mat2(a * j(x)); };
  out.base_hess_ = [h, a](const Vec2& x) { return Tensor3_2(a * h(x)); };
  out.name_ = std::to_string(a) + "*(" + name_ + ")";
  return out;
}

VectorField VectorField::axpy(double a, const VectorField& other) const {
  if (zero_) return other;
  if (other.zero_) return scaled(a);
  const VectorField self = *this;
  VectorField out;
  out.name_ = std::to_string(a) + "*(" + name_ + ")+(" + other.name_ + ")";
  out.support_ = merge(support_, other.support_);
  out.zero_ = false;
  out.has_cutoff_ = false;
  out.base_eval_ = [self, other, a](const Vec2& x) { return Vec2(a * self.eval(x) + other.eval(x)); };
  out.base_jac_ = [self, other, a](const Vec2& x) { return Mat2(a * self.jac(x) + other.jac(x)); };
  out.base_hess_ = [self, other, a](const Vec2& x) {
    Tensor3_2 t = self.hess(x);
    t *= a;
    t += other.hess(x);
    return t;
  };
  return out;
}

VectorField make_vector_field(const CatalogSpec& spec, const Box& support, double margin) {
  Vec2 m = margin > 0.0 ? Vec2(margin, margin) : Vec2(0.1 * (support.hi - support.lo));
  const auto& p = spec.params;
  const std::string name = spec.str();
  if (spec.name == "zero") {
    require_params(spec, 0);
    return VectorField();
  }
  if (spec.name == "constant") {
    require_params(spec, 2);
    const Vec2 c(p[0], p[1]);
    return VectorField(
        name, support, m, [c](const Vec2&) { return c; }, [](const Vec2&) { return Mat2::Zero().eval(); },
        [](const Vec2&) { return Tensor3_2::zero(); });
  }
  if (spec.name == "linear") {
    require_params(spec, 6);
    Mat2 A;
    A << p[0], p[1], p[2], p[3];
    const Vec2 b(p[4], p[5]);
    return VectorField(
        name, support, m, [A, b](const Vec2& x) { return Vec2(A * x + b); },
        [A](const Vec2&) { return A; }, [](const Vec2&) { return Tensor3_2::zero(); });
  }
  if (spec.name == "rotation") {
    require_params(spec, 3);
    const Vec2 c(p[0], p[1]);
    const double w = p[2];
    Mat2 A;
    A << 0.0, -w, w, 0.0;
    return VectorField(
        name, support, m, [A, c](const Vec2& x) { return Vec2(A * (x - c)); },
        [A](const Vec2&) { return A; }, [](const Vec2&) { return Tensor3_2::zero(); });
  }
  if (spec.name == "bump") {
    require_params(spec, 5);
    if (!(p[2] > 0.0)) throw InvalidInput("bump: radius must be positive");
    return bump_field(name, support, m, RadialBump{Vec2(p[0], p[1]), Vec2(p[3], p[4]), p[2] * p[2]});
  }
  if (spec.name == "tensor_bump") {
    require_params(spec, 6);
    if (!(p[2] > 0.0 && p[3] > 0.0)) throw InvalidInput("tensor_bump: radii must be positive");
    return bump_field(name, support, m, ProductBump{Vec2(p[0], p[1]), Vec2(p[2], p[3]), Vec2(p[4], p[5])});
  }
  if (spec.name == "quadratic") {
    require_params(spec, 12);
    std::array<std::array<double, 6>, 2> q;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 6; ++k) q[i][k] = p[6 * i + k];
    auto eval = [q](const Vec2& x) {
      Vec2 v;
      for (int i = 0; i < 2; ++i)
        v(i) = q[i][0] + q[i][1] * x(0) + q[i][2] * x(1) + q[i][3] * x(0) * x(0) +
               q[i][4] * x(0) * x(1) + q[i][5] * x(1) * x(1);
      return v;
    };
    auto jac = [q](const Vec2& x) {
      Mat2 J;
      for (int i = 0; i < 2; ++i) {
        J(i, 0) = q[i][1] + 2.0 * q[i][3] * x(0) + q[i][4] * x(1);
        J(i, 1) = q[i][2] + q[i][4] * x(0) + 2.0 * q[i][5] * x(1);
      }
      return J;
    };
    auto hess = [q](const Vec2&) {
      Tensor3_2 t;
      for (int i = 0; i < 2; ++i) {
        t(i, 0, 0) = 2.0 * q[i][3];
        t(i, 0, 1) = t(i, 1, 0) = q[i][4];
        t(i, 1, 1) = 2.0 * q[i][5];
      }
      return t;
    };
    return VectorField(name, support, m, eval, jac, hess);
  }
  throw InvalidInput("unknown vector field '" + spec.name + "'");
}

FlowState advect(const VectorField& theta, double s, const Vec2& x0, int steps) {
  if (!(s >= 0.0)) throw InvalidInput("advect: s must be non-negative");
  if (steps < 1) throw InvalidInput("advect: steps must be positive");
  FlowState st;
  st.position = x0;
  st.s = s;
  if (s == 0.0 || theta.is_zero()) return st;
  const double h = s / steps;
  Vec2 x = x0;
  Mat2 J = Mat2::Identity();
  for (int n = 0; n < steps; ++n) {
    const Vec2 k1 = theta.eval(x);
    const Mat2 L1 = theta.jac(x) * J;
    const Vec2 x2 = x + 0.5 * h * k1;
    const Vec2 k2 = theta.eval(x2);
    const Mat2 L2 = theta.jac(x2) * (J + 0.5 * h * L1);
    const Vec2 x3 = x + 0.5 * h * k2;
    const Vec2 k3 = theta.eval(x3);
    const Mat2 L3 = theta.jac(x3) * (J + 0.5 * h * L2);
    const Vec2 x4 = x + h * k3;
    const Vec2 k4 = theta.eval(x4);
    const Mat2 L4 = theta.jac(x4) * (J + h * L3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    J += (h / 6.0) * (L1 + 2.0 * L2 + 2.0 * L3 + L4);
    if (!(J.determinant() > 0.0))
      throw FlowDegeneracy("flow Jacobian lost orientation at s = " + std::to_string(h * (n + 1)));
  }
  st.position = x;
  st.jacobian = J;
  return st;
}

Vec2 advect_position(const VectorField& theta, double s, const Vec2& x0, int steps) {
  if (!(s >= 0.0)) throw InvalidInput("advect: s must be non-negative");
  if (steps < 1) throw InvalidInput("advect: steps must be positive");
  if (s == 0.0 || theta.is_zero()) return x0;
  const double h = s / steps;
  Vec2 x = x0;
  for (int n = 0; n < steps; ++n) {
    const Vec2 k1 = theta.eval(x);
    const Vec2 k2 = theta.eval(x + 0.5 * h * k1);
    const Vec2 k3 = theta.eval(x + 0.5 * h * k2);
    const Vec2 k4 = theta.eval(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

double xi(const FlowState& state) { return state.jacobian.determinant(); }

Mat2 m_of_s(const FlowState& state, const Mat2& Q) {
  const double det = state.jacobian.determinant();
  if (!(det > 0.0)) throw FlowDegeneracy("singular flow Jacobian");
  const Mat2 Jinv = state.jacobian.inverse();
  return det * Jinv * Q * Jinv.transpose();
}

Mat2 m_prime0(const Mat2& theta_jac, const Mat2& Q) {
  return theta_jac.trace() * Q - theta_jac * Q - Q * theta_jac.transpose();
}

Mat2 m_prime0(const VectorField& theta, const Vec2& x, const Mat2& Q) {
  return m_prime0(theta.jac(x), Q);
}

namespace {
void require_unit(const Vec2& n) {
  if (std::abs(n.norm() - 1.0) > 1e-12) throw InvalidInput("normal vector is not unit length");
}
}  // namespace

double xi_gamma(const FlowState& state, const Vec2& n) {
  require_unit(n);
  const double det = state.jacobian.determinant();
  if (!(det > 0.0)) throw FlowDegeneracy("singular flow Jacobian");
  return det * (state.jacobian.inverse().transpose() * n).norm();
}

double div_gamma(const Mat2& theta_jac, const Vec2& n) {
  require_unit(n);
  return theta_jac.trace() - n.dot(theta_jac * n);
}

double div_gamma(const VectorField& theta, const Vec2& x, const Vec2& n) {
  return div_gamma(theta.jac(x), n);
}

Mat2 jac_gamma(const Mat2& theta_jac, const Vec2& n) {
  return theta_jac - (theta_jac * n) * n.transpose();
}

Mesh transport_mesh(const Mesh& mesh, const VectorField& theta, double s, int steps) {
  if (!theta.is_zero() && !mesh.holdall().contains(theta.support_box()))
    throw InvalidInput("support of theta is not contained in the hold-all box");
  const VectorField field = s < 0.0 ? theta.negated() : theta;
  const double t = std::abs(s);
  std::vector<Vec2> nodes(mesh.nodes().size());
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = advect_position(field, t, mesh.nodes()[k], steps);
  for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
    const auto& tri = mesh.triangles()[e];
    const Vec2 a = nodes[tri[1]] - nodes[tri[0]], b = nodes[tri[2]] - nodes[tri[0]];
    if (!(a(0) * b(1) - a(1) * b(0) > 0.0))
      throw FlowDegeneracy("triangle " + std::to_string(e) + " inverted by the flow", static_cast<long>(e));
  }
  return mesh.with_nodes(std::move(nodes));
}

}  // namespace shapegrad
