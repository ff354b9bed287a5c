#pragma once
#include <functional>
#include <vector>

namespace sdsm {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

// Adaptive Simpson with Richardson correction.  abs_tol is an absolute
// tolerance for the whole interval; max_depth bounds the recursion.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol,
                                  int max_depth);

struct GaussNode {
  double x;  // node on [-1, 1]
  double w;
};

// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
// on the Legendre recurrence; cached per order.
const std::vector<GaussNode>& gauss_legendre(int order);

}  // namespace sdsm
