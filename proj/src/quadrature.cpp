#include "sdsm/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace sdsm {

namespace {

struct SimpsonCtx {
  const std::function<double(double)>* f;
  double tol;
  int max_depth;
  bool converged;
};

double simpson_rec(SimpsonCtx& ctx, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = (*ctx.f)(lm), frm = (*ctx.f)(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth >= ctx.max_depth) {
    ctx.converged = ctx.converged && std::abs(delta) <= 15.0 * tol;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_rec(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a, double b, double abs_tol,
                                  int max_depth) {
  QuadratureResult r;
  if (a == b) {
    r.value = 0;
    r.converged = true;
    return r;
  }
  SimpsonCtx ctx{&f, abs_tol, max_depth, true};
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  r.value = simpson_rec(ctx, a, b, fa, fm, fb, whole, abs_tol, 0);
  r.error_estimate = abs_tol;
  r.converged = ctx.converged;
  return r;
}

const std::vector<GaussNode>& gauss_legendre(int order) {
  static std::map<int, std::vector<GaussNode>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Nodes on [-1, 1] by Newton iteration on the Legendre recurrence.
  std::vector<GaussNode> nodes(order);
  int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    nodes[i] = {-x, w};
    nodes[order - 1 - i] = {x, w};
  }
  auto [pos, ok] = cache.emplace(order, std::move(nodes));
  return pos->second;
}

}  // namespace sdsm
