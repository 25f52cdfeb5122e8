#pragma once

#include <utility>
#include <vector>

#include "shapegrad/tensor.hpp"

namespace shapegrad {

/// Points (ξ, η) on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Points t on [0, 1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// n-point Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of total degree ≤ degree.
QuadratureRule triangle_rule(int degree);

/// Gauss-Legendre rule on [0, 1] exact up to `degree`.
EdgeRule edge_rule(int degree);

inline constexpr int kDefaultVolumeDegree = 4;
inline constexpr int kNonlinearVolumeDegree = 6;
inline constexpr int kDefaultEdgeDegree = 5;

}  // namespace shapegrad
