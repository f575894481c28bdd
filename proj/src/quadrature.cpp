#include "qgfem/quadrature.hpp"

#include <cmath>

namespace qg {

QuadratureRule make_quadrature() {
  // Closed-form 5-point Gauss-Legendre nodes/weights on [-1,1], then mapped
  // affinely onto [0,1] (node -> (node+1)/2, weight -> weight/2).
  const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
  const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;

  QuadratureRule rule;
  const double node[5] = {-b, -a, 0.0, a, b};
  const double wt[5] = {wb, wa, 128.0 / 225.0, wa, wb};
  for (int k = 0; k < 5; ++k) {
    rule.s1d[k] = 0.5 * (node[k] + 1.0);
    rule.w1d[k] = 0.5 * wt[k];
  }
  for (int qy = 0; qy < 5; ++qy)
    for (int qx = 0; qx < 5; ++qx) {
      const int q = qy * 5 + qx;
      rule.xi[q] = rule.s1d[qx];
      rule.eta[q] = rule.s1d[qy];
      rule.w[q] = rule.w1d[qx] * rule.w1d[qy];
    }
  return rule;
}

}  // namespace qg
