#include "sdsm/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sdsm/quadrature.hpp"

namespace sdsm {

double laplace_mass(double mass, double sigma0, double t, double lambda) {
  if (mass <= 0 || sigma0 <= 0 || t <= 0)
    throw std::invalid_argument("laplace_mass: mass, sigma0, t must be positive");
  double denom = 2.0 - sigma0 * lambda * t;
  if (denom <= 0)
    throw std::domain_error("laplace_mass: transform diverges at sigma0*lambda*t >= 2");
  return std::exp(2.0 * mass * lambda / denom);
}

double mass_second_moment(double mass, double sigma0, double t) {
  return mass * mass + sigma0 * t * mass;
}

namespace {

// Heat semigroup action on a constant or gaussian test function, variance
// coefficient a: (T_s phi)(x) with one-particle kernel N(x, a s).
double heat_apply(const ScalarField& phi, double a, double s, double x) {
  if (const auto* c = std::get_if<ConstantFn>(&phi)) return c->value;
  if (std::holds_alternative<ZeroFn>(phi)) return 0.0;
  const auto* g = std::get_if<GaussianFn>(&phi);
  if (!g)
    throw std::invalid_argument(
        "semigroup closed form needs a constant or gaussian test function, got " +
        field_kind_name(phi));
  double v = g->width * g->width + a * s;
  double d = x - g->center;
  return g->amplitude * g->width / std::sqrt(v) * std::exp(-0.5 * d * d / v);
}

struct MomentCore {
  double a;
  ScalarField sigma;
  ScalarField phi;
  const InitialMeasure* mu;
  double t;

  double first() const {
    double s = 0;
    for (const auto& atom : mu->atoms)
      s += atom.mass * heat_apply(phi, a, t, atom.x);
    return s;
  }

  // <T_{t-s}[ sigma (T_s phi)^2 ], delta_x> by the standardized substitution
  // y = x + u sqrt(a (t-s)): the heat kernel becomes the unit gaussian and the
  // remaining factors stay smooth in u away from sigma's jump points, so the
  // integral is split there and each smooth piece handled adaptively.
  double smoothed_product(double s, double x) const {
    double v = a * (t - s);
    if (v <= 1e-300) {
      double p = heat_apply(phi, a, s, x);
      return field_eval(sigma, x) * p * p;
    }
    double root = std::sqrt(v);
    auto integrand = [&](double u) {
      double y = x + u * root;
      double p = heat_apply(phi, a, s, y);
      double n = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
      return n * field_eval(sigma, y) * p * p;
    };
    // A piece endpoint placed exactly on a jump feeds Simpson the one-sided
    // value from the wrong side, so each cut is inset by a hair; the skipped
    // slivers hold O(1e-9) of bounded integrand.
    constexpr double kInset = 1e-9;
    std::vector<double> cuts;
    for (double y : field_jump_points(sigma)) {
      double u = (y - x) / root;
      if (u > -12.0 + kInset && u < 12.0 - kInset) cuts.push_back(u);
    }
    std::sort(cuts.begin(), cuts.end());
    double total = 0;
    double lo = -12.0;
    auto add_piece = [&](double a_u, double b_u) {
      if (b_u <= a_u) return;
      QuadratureResult q = adaptive_simpson(integrand, a_u, b_u, 1e-10, 40);
      if (!q.converged)
        throw std::runtime_error("second-moment space quadrature did not converge");
      total += q.value;
    };
    for (double cut : cuts) {
      add_piece(lo, cut - kInset);
      lo = cut + kInset;
    }
    add_piece(lo, 12.0);
    return total;
  }

  double second() const {
    double f = first();
    if (t == 0) return f * f;
    const auto& nodes = gauss_legendre(64);
    double integral = 0;
    for (const auto& node : nodes) {
      double s = 0.5 * t * (node.x + 1.0);
      double val = 0;
      for (const auto& atom : mu->atoms)
        val += atom.mass * smoothed_product(s, atom.x);
      integral += node.w * val;
    }
    integral *= 0.5 * t;
    return f * f + integral;
  }
};

}  // namespace

double second_moment_quadrature(const KernelModel& m, const ScalarField& phi,
                                const InitialMeasure& mu, double t) {
  if (!std::holds_alternative<ZeroFn>(m.h))
    throw std::invalid_argument(
        "second-moment quadrature requires a vanishing interaction kernel");
  const auto* c = std::get_if<ConstantFn>(&m.c);
  if (!c)
    throw std::invalid_argument(
        "second-moment quadrature requires a constant diffusion coefficient");
  if (mu.density.kind != MeasureDensity::Kind::None)
    throw std::invalid_argument(
        "second-moment quadrature requires a purely atomic initial measure");
  MomentCore core{c->value * c->value, m.sigma, phi, &mu, t};
  return core.second();
}

MomentPair sbm_moments(double a_inf, double sigma_inf, const ScalarField& phi,
                       const InitialMeasure& mu, double t) {
  if (a_inf <= 0) throw std::invalid_argument("sbm_moments: a_inf must be positive");
  if (sigma_inf < 0)
    throw std::invalid_argument("sbm_moments: sigma_inf must be nonnegative");
  if (mu.density.kind != MeasureDensity::Kind::None)
    throw std::invalid_argument("sbm_moments requires a purely atomic measure");
  MomentCore core{a_inf, ConstantFn{sigma_inf}, phi, &mu, t};
  MomentPair out;
  out.first = core.first();
  out.second = core.second();
  return out;
}

double density_bound(double b, double l, double eps, double t) {
  if (b <= 0 || l <= 0 || eps <= 0 || t <= 0)
    throw std::invalid_argument("density_bound: all arguments must be positive");
  return b * (2.0 * l + std::sqrt(2.0 * M_PI * eps * t)) / std::sqrt(t);
}

}  // namespace sdsm
