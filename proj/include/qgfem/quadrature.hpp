#pragma once

#include <array>

namespace qg {

// Tensor Gauss-Legendre rule on the reference cell [0,1]^2, 5 points per
// direction. Exact for tensor polynomials of degree <= 9 in each variable,
// which covers every bilinear and trilinear integrand produced by the
// bicubic Hermite basis. Weights sum to 1 (the reference cell has area 1).
struct QuadratureRule {
  static constexpr int kPerDir = 5;
  static constexpr int kPoints = kPerDir * kPerDir;

  std::array<double, kPerDir> s1d;  // 1D abscissae on [0,1]
  std::array<double, kPerDir> w1d;  // 1D weights, sum to 1

  std::array<double, kPoints> xi, eta, w;  // tensor rule, x fastest
};

QuadratureRule make_quadrature();

}  // namespace qg
