#include "sdsm/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sdsm/quadrature.hpp"

namespace sdsm {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

bool admissible_h(const ScalarField& h) {
  return std::holds_alternative<ZeroFn>(h) || std::holds_alternative<BoxFn>(h) ||
         std::holds_alternative<GaussianFn>(h) ||
         std::holds_alternative<TabulatedFn>(h);
}

double rho_tabulated(const TabulatedFn& h, double x) {
  if (h.x.size() < 2) return 0.0;
  double lo = std::max(h.x.front(), h.x.front() + x);
  double hi = std::min(h.x.back(), h.x.back() + x);
  if (lo >= hi) return 0.0;
  ScalarField hf = h;
  auto integrand = [&hf, x](double y) {
    return field_eval(hf, y - x) * field_eval(hf, y);
  };
  QuadratureResult q = adaptive_simpson(integrand, lo, hi, 1e-10, 40);
  return q.value;
}

}  // namespace

KernelModel make_model(ScalarField h, ScalarField c, ScalarField sigma) {
  if (!admissible_h(h)) {
    throw std::invalid_argument("interaction kernel kind not square-integrable: " +
                                field_kind_name(h));
  }
  if (!field_is_nonneg(sigma)) {
    throw std::invalid_argument("branching density must be nonnegative");
  }
  double ssup = field_sup_abs(sigma);
  if (!std::isfinite(ssup)) {
    throw std::invalid_argument("branching density must be bounded");
  }
  KernelModel m;
  m.h = std::move(h);
  m.c = std::move(c);
  m.sigma = std::move(sigma);
  m.sigma_sup = ssup;
  m.h_smooth = !(std::holds_alternative<BoxFn>(m.h) ||
                 std::holds_alternative<TabulatedFn>(m.h));
  m.rho0 = rho_eval(m, 0.0);
  return m;
}

double rho_eval(const KernelModel& m, double x) {
  if (std::holds_alternative<ZeroFn>(m.h)) return 0.0;
  if (const auto* b = std::get_if<BoxFn>(&m.h)) {
    double len = b->right - b->left;
    return b->height * b->height * std::max(0.0, len - std::abs(x));
  }
  if (const auto* g = std::get_if<GaussianFn>(&m.h)) {
    double a2 = g->amplitude * g->amplitude;
    double w = g->width;
    return a2 * w * kSqrtPi * std::exp(-x * x / (4.0 * w * w));
  }
  return rho_tabulated(std::get<TabulatedFn>(m.h), x);
}

double a_eval(const KernelModel& m, double x) {
  double cx = field_eval(m.c, x);
  return cx * cx + m.rho0;
}

double c_eval(const KernelModel& m, double x) { return field_eval(m.c, x); }

double sigma_eval(const KernelModel& m, double x) {
  return field_eval(m.sigma, x);
}

KernelInfo kernel_info(const KernelModel& m) {
  KernelInfo info;
  info.h_kind = field_kind_name(m.h);
  info.c_kind = field_kind_name(m.c);
  info.sigma_kind = field_kind_name(m.sigma);
  info.rho0 = m.rho0;
  info.a_at_zero = a_eval(m, 0.0);
  info.sigma_sup = m.sigma_sup;
  info.h_smooth = m.h_smooth;
  return info;
}

StepCovariance step_covariance(const KernelModel& m, std::span<const double> x,
                               double dt) {
  int n = static_cast<int>(x.size());
  StepCovariance out;
  out.sigma_dt = SymMatrix(n);
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) {
    double ci = field_eval(m.c, x[i]);
    for (int j = 0; j <= i; ++j) {
      double v = rho_eval(m, x[i] - x[j]);
      if (i == j) v += ci * ci;
      v *= dt;
      out.sigma_dt.at(i, j) = v;
      out.sigma_dt.at(j, i) = v;
    }
    max_diag = std::max(max_diag, out.sigma_dt.at(i, i));
  }
  double scale = std::max(max_diag, 1e-300);
  double zero_tol = 1e-12 * scale;
  const double ladder[] = {0.0, 1e-14, 1e-12, 1e-10, 1e-8};
  CholOutcome last;
  for (double lv : ladder) {
    last = cholesky_semidef(out.sigma_dt, lv * scale, zero_tol);
    if (last.ok) {
      out.factor = std::move(last.factor);
      out.jitter_used = lv * scale;
      return out;
    }
  }
  throw std::runtime_error(
      "step covariance not positive semidefinite at jitter 1e-8: min pivot " +
      std::to_string(last.min_pivot) +
      " (estimated smallest eigenvalue of the increment covariance)");
}

GramFactor gram_factor(const KernelModel& m, std::span<const double> x) {
  int n = static_cast<int>(x.size());
  GramFactor out;
  if (n == 0 || m.rho0 == 0.0) {
    out.factor.n = n;
    out.factor.rank = 0;
    out.factor.residual_diag.assign(n, 0.0);
    return out;
  }

  std::function<double(int, int)> entry;
  if (const auto* g = std::get_if<GaussianFn>(&m.h)) {
    double s = g->amplitude * g->amplitude * g->width * kSqrtPi;
    double q = -1.0 / (4.0 * g->width * g->width);
    entry = [s, q, x](int i, int j) {
      double d = x[i] - x[j];
      return s * std::exp(q * d * d);
    };
  } else {
    const KernelModel* mp = &m;
    entry = [mp, x](int i, int j) { return rho_eval(*mp, x[i] - x[j]); };
  }

  double stop_tol = 1e-13 * m.rho0;
  const double ladder[] = {0.0, 1e-14, 1e-12, 1e-10, 1e-8};
  PivotedCholOutcome last;
  for (double lv : ladder) {
    double jitter = lv * m.rho0;
    last = pivoted_cholesky(n, entry, jitter, stop_tol, 1e-8 * m.rho0, n);
    if (last.ok) {
      out.factor = std::move(last.factor);
      out.jitter_used = jitter;
      return out;
    }
  }
  throw std::runtime_error(
      "interaction Gram matrix not positive semidefinite at jitter 1e-8: min "
      "residual diagonal " +
      std::to_string(last.min_residual));
}

}  // namespace sdsm
