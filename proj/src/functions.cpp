#include "shapegrad/functions.hpp"

#include <cmath>
#include <sstream>

namespace shapegrad {

namespace {

void require_params(const CatalogSpec& spec, std::size_t n) {
  if (spec.params.size() != n)
    throw InvalidInput("catalog entry '" + spec.name + "' expects " + std::to_string(n) +
                       " parameters, got " + std::to_string(spec.params.size()));
}

// Coefficients of c0 + cx x + cy y + cxx x² + cxy xy + cyy y² + cubic terms.
ScalarFunction polynomial(const std::string& name, std::array<double, 10> c) {
  ScalarFunction f;
  f.name = name;
  f.value = [c](const Vec2& p) {
    const double x = p(0), y = p(1);
    return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y +
           c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y;
  };
  f.grad = [c](const Vec2& p) {
    const double x = p(0), y = p(1);
    return Vec2(c[1] + 2 * c[3] * x + c[4] * y + 3 * c[6] * x * x + 2 * c[7] * x * y + c[8] * y * y,
                c[2] + c[4] * x + 2 * c[5] * y + c[7] * x * x + 2 * c[8] * x * y + 3 * c[9] * y * y);
  };
  f.hess = [c](const Vec2& p) {
    const double x = p(0), y = p(1);
    Mat2 h;
    h(0, 0) = 2 * c[3] + 6 * c[6] * x + 2 * c[7] * y;
    h(0, 1) = c[4] + 2 * c[7] * x + 2 * c[8] * y;
    h(1, 0) = h(0, 1);
    h(1, 1) = 2 * c[5] + 2 * c[8] * x + 6 * c[9] * y;
    return h;
  };
  f.grad_lap = [c](const Vec2&) { return Vec2(6 * c[6] + 2 * c[8], 2 * c[7] + 6 * c[9]); };
  return f;
}

}  // namespace

CatalogSpec CatalogSpec::parse(const std::string& text) {
  std::istringstream in(text);
  CatalogSpec spec;
  if (!(in >> spec.name)) throw InvalidInput("empty catalog reference");
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw InvalidInput("bad numeric parameter '" + tok + "' in '" + text + "'");
    spec.params.push_back(v);
  }
  return spec;
}

std::string CatalogSpec::str() const {
  std::ostringstream out;
  out << name;
  out.precision(17);
  for (double p : params) out << ' ' << p;
  return out.str();
}

ScalarFunction constant_function(double c) {
  return make_scalar_function(CatalogSpec{"constant", {c}});
}

ScalarFunction make_scalar_function(const CatalogSpec& spec) {
  const auto& p = spec.params;
  if (spec.name == "constant") {
    require_params(spec, 1);
    return polynomial(spec.str(), {p[0], 0, 0, 0, 0, 0, 0, 0, 0, 0});
  }
  if (spec.name == "affine") {
    require_params(spec, 3);
    return polynomial(spec.str(), {p[0], p[1], p[2], 0, 0, 0, 0, 0, 0, 0});
  }
  if (spec.name == "quadratic") {
    require_params(spec, 6);
    return polynomial(spec.str(), {p[0], p[1], p[2], p[3], p[4], p[5], 0, 0, 0, 0});
  }
  if (spec.name == "cubic") {
    require_params(spec, 10);
    return polynomial(spec.str(), {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9]});
  }
  if (spec.name == "sinsin") {
    require_params(spec, 3);
    const double a = p[0], kx = p[1], ky = p[2];
    ScalarFunction f;
    f.name = spec.str();
    f.value = [=](const Vec2& x) { return a * std::sin(kx * x(0)) * std::sin(ky * x(1)); };
    f.grad = [=](const Vec2& x) {
      return Vec2(a * kx * std::cos(kx * x(0)) * std::sin(ky * x(1)),
                  a * ky * std::sin(kx * x(0)) * std::cos(ky * x(1)));
    };
    f.hess = [=](const Vec2& x) {
      const double sx = std::sin(kx * x(0)), cx = std::cos(kx * x(0));
      const double sy = std::sin(ky * x(1)), cy = std::cos(ky * x(1));
      Mat2 h;
      h << -a * kx * kx * sx * sy, a * kx * ky * cx * cy, a * kx * ky * cx * cy, -a * ky * ky * sx * sy;
      return h;
    };
    f.grad_lap = [g = f.grad, k2 = kx * kx + ky * ky](const Vec2& x) { return Vec2(-k2 * g(x)); };
    return f;
  }
  if (spec.name == "gaussian") {
    require_params(spec, 4);
    const double a = p[0], s2 = p[3] * p[3];
    const Vec2 c(p[1], p[2]);
    if (!(p[3] > 0)) throw InvalidInput("gaussian: sigma must be positive");
    ScalarFunction f;
    f.name = spec.str();
    f.value = [=](const Vec2& x) { return a * std::exp(-(x - c).squaredNorm() / (2 * s2)); };
    f.grad = [=](const Vec2& x) {
      const double e = a * std::exp(-(x - c).squaredNorm() / (2 * s2));
      return Vec2(-e * (x - c) / s2);
    };
    f.hess = [=](const Vec2& x) {
      const Vec2 d = x - c;
      const double e = a * std::exp(-d.squaredNorm() / (2 * s2));
      return Mat2(e * (d * d.transpose() / (s2 * s2) - Mat2::Identity() / s2));
    };
    f.grad_lap = [=](const Vec2& x) {
      const Vec2 d = x - c;
      const double e = a * std::exp(-d.squaredNorm() / (2 * s2));
      return Vec2(-e * d / s2 * (d.squaredNorm() / (s2 * s2) - 2.0 / s2) + 2.0 * e * d / (s2 * s2));
    };
    return f;
  }
  throw InvalidInput("unknown scalar function '" + spec.name + "'");
}

TimeFunction steady(const ScalarFunction& f) {
  TimeFunction t;
  t.name = f.name;
  t.value = [v = f.value](double, const Vec2& x) { return v(x); };
  t.grad = [g = f.grad](double, const Vec2& x) { return g(x); };
  return t;
}

TimeFunction make_time_function(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  in >> head;
  if (head != "expdecay") return steady(make_scalar_function(CatalogSpec::parse(text)));
  double rate = 0.0;
  if (!(in >> rate)) throw InvalidInput("expdecay: missing rate in '" + text + "'");
  std::string rest;
  std::getline(in, rest);
  const ScalarFunction phi = make_scalar_function(CatalogSpec::parse(rest));
  TimeFunction f;
  f.name = text;
  f.value = [=](double t, const Vec2& x) { return std::exp(-rate * t) * phi.value(x); };
  f.grad = [=](double t, const Vec2& x) { return Vec2(std::exp(-rate * t) * phi.grad(x)); };
  return f;
}

MatrixFunction constant_matrix(const Mat2& m) {
  MatrixFunction f;
  std::ostringstream name;
  name.precision(17);
  name << "constant " << m(0, 0) << ' ' << m(0, 1) << ' ' << m(1, 1);
  f.name = name.str();
  f.value = [m](double, const Vec2&) { return m; };
  f.grad = [](double, const Vec2&) { return Tensor3_2::zero(); };
  return f;
}

MatrixFunction make_matrix_function(const CatalogSpec& spec) {
  const auto& p = spec.params;
  if (spec.name == "constant") {
    require_params(spec, 3);
    Mat2 m;
    m << p[0], p[1], p[1], p[2];
    auto f = constant_matrix(m);
    f.name = spec.str();
    return f;
  }
  if (spec.name == "modulated") {
    require_params(spec, 6);
    Mat2 m0;
    m0 << p[0], p[1], p[1], p[2];
    const double a = p[3];
    const Vec2 b(p[4], p[5]);
    MatrixFunction f;
    f.name = spec.str();
    f.value = [=](double t, const Vec2& x) { return Mat2((1.0 + a * t + b.dot(x)) * m0); };
    f.steady_in_time = a == 0.0;
    f.grad = [=](double, const Vec2&) {
      Tensor3_2 dm;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) dm(i, j, k) = m0(i, j) * b(k);
      return dm;
    };
    return f;
  }
  throw InvalidInput("unknown matrix function '" + spec.name + "'");
}

NonlinearFunction make_nonlinear_function(const CatalogSpec& spec) {
  const auto& p = spec.params;
  NonlinearFunction f;
  f.name = spec.str();
  if (spec.name == "m_affine") {
    require_params(spec, 3);
    const double a = p[0], c = p[1], b = p[2];
    f.value = [=](const Vec2& x, double r) { return a + c * x.squaredNorm() + b * r; };
    f.dr = [=](const Vec2&, double) { return b; };
    f.dx = [=](const Vec2& x, double) { return Vec2(2 * c * x); };
    return f;
  }
  if (spec.name == "m_tanh") {
    require_params(spec, 3);
    const double a = p[0], c = p[1], b = p[2];
    f.value = [=](const Vec2& x, double r) { return a + c * x.squaredNorm() + b * std::tanh(r); };
    f.dr = [=](const Vec2&, double r) {
      const double ch = std::cosh(r);
      return b / (ch * ch);
    };
    f.dx = [=](const Vec2& x, double) { return Vec2(2 * c * x); };
    return f;
  }
  if (spec.name == "f_cubic") {
    require_params(spec, 3);
    const double k = p[0], e = p[1], eps = p[2];
    f.value = [=](const Vec2& x, double r) { return (k + e * x(0)) * r + eps * r * r * r; };
    f.dr = [=](const Vec2& x, double r) { return k + e * x(0) + 3 * eps * r * r; };
    f.dx = [=](const Vec2&, double r) { return Vec2(e * r, 0.0); };
    return f;
  }
  if (spec.name == "m_algebraic") {
    require_params(spec, 2);
    const double a = p[0], b = p[1];
    f.value = [=](const Vec2&, double r) { return a + b * r / std::sqrt(1.0 + r * r); };
    f.dr = [=](const Vec2&, double r) { return b / std::pow(1.0 + r * r, 1.5); };
    f.dx = [](const Vec2&, double) { return Vec2(0.0, 0.0); };
    return f;
  }
  if (spec.name == "f_sinx") {
    require_params(spec, 2);
    const double k = p[0], e = p[1];
    f.value = [=](const Vec2& x, double r) { return k * r + e * std::sin(x(0)); };
    f.dr = [=](const Vec2&, double) { return k; };
    f.dx = [=](const Vec2& x, double) { return Vec2(e * std::cos(x(0)), 0.0); };
    return f;
  }
  if (spec.name == "linear_r") {
    require_params(spec, 1);
    const double k = p[0];
    f.value = [=](const Vec2&, double r) { return k * r; };
    f.dr = [=](const Vec2&, double) { return k; };
    f.dx = [](const Vec2&, double) { return Vec2(0.0, 0.0); };
    return f;
  }
  throw InvalidInput("unknown nonlinear function '" + spec.name + "'");
}

NonlinearFunction tracking_integrand(const ScalarFunction& ud) {
  NonlinearFunction f;
  f.name = "tracking " + ud.name;
  f.value = [v = ud.value](const Vec2& x, double r) { return (r - v(x)) * (r - v(x)); };
  f.dr = [v = ud.value](const Vec2& x, double r) { return 2.0 * (r - v(x)); };
  f.dx = [v = ud.value, g = ud.grad](const Vec2& x, double r) { return Vec2(-2.0 * (r - v(x)) * g(x)); };
  return f;
}

}  // namespace shapegrad
