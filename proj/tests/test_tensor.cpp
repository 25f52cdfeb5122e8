#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "shapegrad/tensor.hpp"

using namespace shapegrad;

namespace {

template <int D>
struct Rand {
  std::mt19937_64 gen{12345};
  std::uniform_real_distribution<double> dist{-1.0, 1.0};

  double operator()() { return dist(gen); }
  Vec<D> vec() {
    Vec<D> v;
    for (int i = 0; i < D; ++i) v(i) = (*this)();
    return v;
  }
  Mat<D> mat() {
    Mat<D> m;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) m(i, j) = (*this)();
    return m;
  }
  Tensor3<D> ten() {
    Tensor3<D> t;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j)
        for (int k = 0; k < D; ++k) t(i, j, k) = (*this)();
    return t;
  }
};

bool close(double a, double b, double scale = 1.0) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, scale, std::abs(a), std::abs(b)});
}

template <int D>
void identities() {
  Rand<D> r;
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat<D> S = r.mat(), T = r.mat(), U = r.mat();
    const Vec<D> a = r.vec(), b = r.vec(), c = r.vec(), d = r.vec();
    const Tensor3<D> S3 = r.ten(), T3 = r.ten();

    CHECK(close(double_dot<D>(S, outer<D>(a, b)), a.dot(S * b)));
    CHECK(close(a.dot(S * b), (S.transpose() * a).dot(b)));
    CHECK((S * outer<D>(a, b) - outer<D>(S * a, b)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((outer<D>(a, b) * c - c.dot(b) * a).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(close(double_dot<D>(outer<D>(a, b), outer<D>(c, d)), a.dot(c) * b.dot(d)));
    CHECK(close(double_dot<D>(S * T, U), double_dot<D>(T, S.transpose() * U)));
    CHECK(close(double_dot<D>(matvec3<D>(transpose3<D>(S3), a), T), triple_dot<D>(S3, outer_vm<D>(a, T))));
    CHECK(close(a.dot(apply3<D>(S3, b, c)), b.dot(apply3<D>(transpose3<D>(S3), c, a))));
    const Tensor3<D> back = transpose3<D>(transpose3<D>(transpose3<D>(S3)));
    CHECK(back.data() == S3.data());
    (void)T3;
  }
}

}  // namespace

TEST_CASE("double_dot examples") {
  CHECK(double_dot<2>(Mat2::Identity(), Mat2::Identity()) == 2.0);
  const Mat2 S = outer<2>(Vec2(1, 2), Vec2(3, 4));
  const Mat2 T = outer<2>(Vec2(5, 6), Vec2(7, 8));
  CHECK(double_dot<2>(S, T) == doctest::Approx(901.0).epsilon(1e-15));

  Rand<2> r;
  const Mat2 A = r.mat(), B = r.mat();
  double sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sum += A(i, j) * B(i, j);
  CHECK(close(double_dot<2>(A, B), sum));
}

TEST_CASE("triple_dot examples") {
  Tensor3_2 S, T;
  S(0, 0, 0) = 3.0;
  T(0, 0, 0) = 5.0;
  CHECK(triple_dot<2>(S, T) == 15.0);
  CHECK(triple_dot<2>(Tensor3_2::zero(), Tensor3_2::zero()) == 0.0);

  Rand<3> r;
  const auto A = r.ten(), B = r.ten();
  double sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) sum += A(i, j, k) * B(i, j, k);
  CHECK(close(triple_dot<3>(A, B), sum));
}

TEST_CASE("transpose3 permutes indices") {
  Tensor3_2 S;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) S(i, j, k) = 100 * (i + 1) + 10 * (j + 1) + (k + 1);
  const Tensor3_2 T = transpose3<2>(S);
  CHECK(T(0, 1, 0) == 112.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(T(i, j, k) == S(k, i, j));
}

TEST_CASE("apply3 and matvec3") {
  Rand<2> r;
  const Tensor3_2 S = r.ten();
  CHECK(matvec3<2>(S, Vec2::Zero()).isZero(0.0));
  CHECK(apply3<2>(S, r.vec(), Vec2::Zero()).isZero(0.0));

  Tensor3_2 E;
  E(0, 1, 1) = 1.0;
  CHECK(apply3<2>(E, Vec2(0, 1), Vec2(0, 1)) == Vec2(1, 0));

  const Vec2 b = r.vec(), c = r.vec(), a = r.vec();
  Vec2 v = Vec2::Zero();
  Mat2 m = Mat2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        v(i) += S(i, j, k) * b(j) * c(k);
        m(i, j) += S(i, j, k) * c(k);
      }
  CHECK((apply3<2>(S, b, c) - v).norm() <= 1e-14);
  CHECK((matvec3<2>(S, c) - m).norm() <= 1e-14);
  CHECK(close(a.dot(apply3<2>(S, b, c)), (matvec3<2>(S, c) * b).dot(a)));
}

TEST_CASE("outer products") {
  const Mat2 m = outer<2>(Vec2(1, 0), Vec2(0, 1));
  CHECK(m(0, 1) == 1.0);
  CHECK(m.sum() == 1.0);
  const Tensor3_2 t = outer_vm<2>(Vec2(0, 1), Mat2::Identity());
  CHECK(t(1, 0, 0) == 1.0);
  CHECK(t(1, 1, 1) == 1.0);
  CHECK(t.max_abs() == 1.0);
  double total = 0.0;
  for (double x : t.data()) total += x;
  CHECK(total == 2.0);

  Rand<3> r;
  const Vec<3> a = r.vec();
  const Mat<3> T = r.mat();
  const auto o = outer_vm<3>(a, T);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) CHECK(o(i, j, k) == a(i) * T(j, k));
}

TEST_CASE("tensor identities on random inputs, d = 2") { identities<2>(); }
TEST_CASE("tensor identities on random inputs, d = 3") { identities<3>(); }

TEST_CASE("transported Hessian rate") {
  const Vec2 g(0.3, -0.7);
  Mat2 H;
  H << 1.0, 0.2, 0.2, -0.5;
  CHECK(transported_hessian_rate<2>(g, H, Mat2::Zero(), Tensor3_2::zero()).isZero(0.0));
  Rand<2> r;
  CHECK(transported_hessian_rate<2>(g, Mat2::Zero(), r.mat(), Tensor3_2::zero()).isZero(0.0));

  Mat2 bad = H;
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(transported_hessian_rate<2>(g, bad, Mat2::Zero(), Tensor3_2::zero()), InvalidInput);
}

TEST_CASE("transported Hessian rate matches a flow-map difference quotient") {
  // ψ(x) = x₁², θ(x) = (x₂², 0). T_s⁻¹ has no closed form, so compose the
  // Hessian of ψ∘T_s⁻¹ from the inverse-function rule with DT_s and D²T_s
  // obtained from the exact flow x₁(s) = x₁ + s x₂², x₂(s) = x₂.
  const Vec2 x(1.0, 1.0);
  auto transported = [&](double s) {
    // T_s(y) = (y₁ + s y₂², y₂); T_s⁻¹(z) = (z₁ − s z₂², z₂).
    // ψ∘T_s⁻¹(z) = (z₁ − s z₂²)²; its Hessian at z = T_s(x):
    const Vec2 z(x(0) + s * x(1) * x(1), x(1));
    const double w = z(0) - s * z(1) * z(1);
    Mat2 Hz;
    Hz(0, 0) = 2.0;
    Hz(0, 1) = Hz(1, 0) = -4.0 * s * z(1);
    Hz(1, 1) = 8.0 * s * s * z(1) * z(1) - 4.0 * s * w;
    return Hz;
  };
  const double h = 1e-5;
  const Mat2 fd = (transported(h) - transported(-h)) / (2.0 * h);

  const Vec2 grad(2.0 * x(0), 0.0);
  Mat2 hess;
  hess << 2.0, 0.0, 0.0, 0.0;
  Mat2 jac;
  jac << 0.0, 2.0 * x(1), 0.0, 0.0;
  Tensor3_2 th;
  th(0, 1, 1) = 2.0;
  const Mat2 rate = transported_hessian_rate<2>(grad, hess, jac, th);
  CHECK((rate - fd).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("transported Laplacian rate") {
  Rand<2> r;
  const Vec2 g = r.vec();
  Mat2 H = r.mat();
  H = 0.5 * (H + H.transpose()).eval();
  CHECK(transported_laplacian_rate<2>(g, H, Mat2::Zero(), Tensor3_2::zero()) == 0.0);
  CHECK(transported_laplacian_rate<2>(g, H, Mat2::Identity(), Tensor3_2::zero()) ==
        doctest::Approx(-2.0 * H.trace()).epsilon(1e-14));

  for (int trial = 0; trial < 200; ++trial) {
    Mat2 Hs = r.mat();
    Hs = 0.5 * (Hs + Hs.transpose()).eval();
    Tensor3_2 th = r.ten();
    for (int i = 0; i < 2; ++i) th(i, 1, 0) = th(i, 0, 1);
    const Vec2 gg = r.vec();
    const Mat2 J = r.mat();
    const double trace = transported_hessian_rate<2>(gg, Hs, J, th).trace();
    CHECK(close(transported_laplacian_rate<2>(gg, Hs, J, th), trace));
  }
}
