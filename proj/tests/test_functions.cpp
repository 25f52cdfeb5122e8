#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shapegrad/functions.hpp"

using namespace shapegrad;

namespace {

constexpr double kStep = 1e-5;

std::vector<Vec2> sample_points() {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < 25; ++i) pts.emplace_back(u(gen), u(gen));
  return pts;
}

Vec2 fd_grad(const std::function<double(const Vec2&)>& f, const Vec2& x) {
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    const Vec2 e = kStep * Vec2::Unit(i);
    g(i) = (f(x + e) - f(x - e)) / (2 * kStep);
  }
  return g;
}

double lap(const ScalarFunction& f, const Vec2& x) { return f.hess(x).trace(); }

}  // namespace

TEST_CASE("catalog specs parse names and parameters") {
  const CatalogSpec s = CatalogSpec::parse("  gaussian 1 -0.5 2e-1   0.3 ");
  CHECK(s.name == "gaussian");
  CHECK(s.params == std::vector<double>{1, -0.5, 0.2, 0.3});
  CHECK(CatalogSpec::parse(s.str()).params == s.params);
  CHECK_THROWS_AS(CatalogSpec::parse(""), InvalidInput);
  CHECK_THROWS_AS(CatalogSpec::parse("constant x"), InvalidInput);
}

TEST_CASE("unknown names and wrong parameter counts are rejected") {
  CHECK_THROWS_AS(make_scalar_function(CatalogSpec::parse("nosuch 1")), InvalidInput);
  CHECK_THROWS_AS(make_scalar_function(CatalogSpec::parse("affine 1 2")), InvalidInput);
  CHECK_THROWS_AS(make_matrix_function(CatalogSpec::parse("constant 1 0")), InvalidInput);
  CHECK_THROWS_AS(make_nonlinear_function(CatalogSpec::parse("m_affine 1")), InvalidInput);
  CHECK_THROWS_AS(make_time_function("expdecay 1"), InvalidInput);
}

TEST_CASE("scalar catalog derivatives match differences") {
  for (const char* text : {"constant 2", "affine 0.5 0.3 -0.2", "quadratic 1 0.2 -0.1 0.5 0.3 -0.4",
                           "cubic 0.1 0.2 -0.1 0.3 0.1 -0.2 0.05 -0.1 0.2 0.1", "sinsin 1 2 1.5",
                           "gaussian 1.2 0.2 -0.1 0.5"}) {
    CAPTURE(text);
    const ScalarFunction f = make_scalar_function(CatalogSpec::parse(text));
    for (const Vec2& x : sample_points()) {
      const Vec2 g = fd_grad(f.value, x);
      CHECK((g - f.grad(x)).norm() <= 1e-8 * (1.0 + g.norm()));
      Mat2 H;
      for (int i = 0; i < 2; ++i) {
        const Vec2 e = kStep * Vec2::Unit(i);
        H.col(i) = (f.grad(x + e) - f.grad(x - e)) / (2 * kStep);
      }
      CHECK((H - f.hess(x)).cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + H.norm()));
      const Vec2 gl = fd_grad([&](const Vec2& y) { return lap(f, y); }, x);
      CHECK((gl - f.grad_lap(x)).norm() <= 1e-6 * (1.0 + gl.norm()));
    }
  }
}

TEST_CASE("time functions") {
  const TimeFunction f = make_time_function("expdecay 0.5 gaussian 2 0.2 -0.1 0.5");
  const ScalarFunction g = make_scalar_function(CatalogSpec::parse("gaussian 2 0.2 -0.1 0.5"));
  const Vec2 x(0.3, -0.4);
  CHECK(f.value(0.8, x) == doctest::Approx(std::exp(-0.4) * g(x)).epsilon(1e-15));
  CHECK((f.grad(0.8, x) - std::exp(-0.4) * g.grad(x)).norm() <= 1e-15);
  const TimeFunction s = make_time_function("affine 1 2 3");
  CHECK(s.value(0.0, x) == s.value(5.0, x));
}

TEST_CASE("matrix catalog: symmetric values and spatial derivative") {
  const MatrixFunction M = make_matrix_function(CatalogSpec::parse("modulated 1.5 0.2 1 0.5 0.1 -0.2"));
  CHECK_FALSE(M.steady_in_time);
  CHECK(make_matrix_function(CatalogSpec::parse("modulated 1.5 0.2 1 0 0.1 -0.2")).steady_in_time);
  for (const Vec2& x : sample_points()) {
    const Mat2 v = M.value(0.3, x);
    CHECK(v(0, 1) == v(1, 0));
    const Tensor3_2 D = M.grad(0.3, x);
    for (int k = 0; k < 2; ++k) {
      const Vec2 e = kStep * Vec2::Unit(k);
      const Mat2 fd = (M.value(0.3, x + e) - M.value(0.3, x - e)) / (2 * kStep);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(D(i, j, k) - fd(i, j)) <= 1e-9);
    }
  }
}

TEST_CASE("nonlinear catalog derivatives match differences") {
  for (const char* text : {"m_affine 1 0.3 0.2", "m_tanh 1.5 0.2 0.4", "m_algebraic 2 1", "f_cubic 1 0.2 0.1",
                           "f_sinx 1 0.1", "linear_r 0.7"}) {
    CAPTURE(text);
    const NonlinearFunction f = make_nonlinear_function(CatalogSpec::parse(text));
    for (const Vec2& x : sample_points())
      for (double r : {-1.3, 0.0, 0.4, 2.1}) {
        const double dr = (f.value(x, r + kStep) - f.value(x, r - kStep)) / (2 * kStep);
        CHECK(std::abs(dr - f.dr(x, r)) <= 1e-8 * (1.0 + std::abs(dr)));
        const Vec2 dx = fd_grad([&](const Vec2& y) { return f.value(y, r); }, x);
        CHECK((dx - f.dx(x, r)).norm() <= 1e-8 * (1.0 + dx.norm()));
      }
  }
}

TEST_CASE("tracking integrand") {
  const ScalarFunction ud = make_scalar_function(CatalogSpec::parse("quadratic 0.1 0.2 0 -0.3 0 0.1"));
  const NonlinearFunction F = tracking_integrand(ud);
  const Vec2 x(0.2, 0.5);
  CHECK(F.value(x, ud(x)) == 0.0);
  CHECK(F.value(x, ud(x) + 0.5) == doctest::Approx(0.25));
  CHECK(F.dr(x, 1.0) == doctest::Approx(2.0 * (1.0 - ud(x))));
  CHECK((F.dx(x, 1.0) + 2.0 * (1.0 - ud(x)) * ud.grad(x)).norm() <= 1e-15);
}
