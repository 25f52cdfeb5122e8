#include "shapegrad/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace shapegrad {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  if (n < 1) throw InvalidInput("gauss_legendre: need at least one point");
  // Symmetric tridiagonal Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    T(k, k - 1) = T(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  std::vector<std::pair<double, double>> nw(n);
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    nw[k] = {es.eigenvalues()(k), 2.0 * v0 * v0};
  }
  std::sort(nw.begin(), nw.end());
  std::vector<double> x(n), w(n);
  for (int k = 0; k < n; ++k) {
    // Symmetrize so rules are exactly mirror-symmetric.
    const auto& mirror = nw[n - 1 - k];
    x[k] = 0.5 * (nw[k].first - mirror.first);
    w[k] = 0.5 * (nw[k].second + mirror.second);
  }
  return {x, w};
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw InvalidInput("triangle_rule: negative degree");
  const int n = std::max(1, (degree + 3) / 2);
  const auto [x, w] = gauss_legendre(n);
  QuadratureRule rule;
  rule.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (x[j] + 1.0);
      rule.points.emplace_back(u, v * (1.0 - u));
      rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - u));
    }
  }
  return rule;
}

EdgeRule edge_rule(int degree) {
  if (degree < 0) throw InvalidInput("edge_rule: negative degree");
  const int n = std::max(1, (degree + 2) / 2);
  const auto [x, w] = gauss_legendre(n);
  EdgeRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (x[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

}  // namespace shapegrad
