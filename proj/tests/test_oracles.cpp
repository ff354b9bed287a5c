#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sdsm/oracles.hpp"
#include "sdsm/quadrature.hpp"

using namespace sdsm;

namespace {

InitialMeasure delta_at(double x, double mass) {
  InitialMeasure mu;
  mu.atoms.push_back({x, mass});
  return mu;
}

// Independent heat-semigroup action by direct convolution quadrature.
double heat_numeric(const ScalarField& phi, double a, double s, double x) {
  if (s == 0) return field_eval(phi, x);
  double v = a * s;
  double root = std::sqrt(v);
  auto integrand = [&](double u) {
    double n = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
    return n * field_eval(phi, x + u * root);
  };
  return adaptive_simpson(integrand, -14.0, 14.0, 1e-13, 44).value;
}

// Closed-form gaussian semigroup leg used by the dense Riemann oracle below.
double heat_gaussian(const GaussianFn& g, double a, double s, double x) {
  double v = g.width * g.width + a * s;
  double d = x - g.center;
  return g.amplitude * g.width / std::sqrt(v) * std::exp(-0.5 * d * d / v);
}

}  // namespace

TEST_CASE("mass Laplace transform closed form and domain") {
  CHECK(laplace_mass(1.0, 1.0, 1.0, -1.0) ==
        doctest::Approx(0.513417119032592).epsilon(1e-14));
  CHECK(laplace_mass(0.5, 1.3, 0.25, -2.0) ==
        doctest::Approx(std::exp(-2.0 / 2.65)).epsilon(1e-14));
  CHECK(laplace_mass(2.0, 1.0, 0.5, 0.0) == 1.0);
  CHECK(laplace_mass(1.0, 1.0, 1.0, 1.5) ==
        doctest::Approx(std::exp(6.0)).epsilon(1e-14));

  CHECK_THROWS_AS(laplace_mass(1.0, 1.0, 1.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(laplace_mass(1.0, 4.0, 1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(laplace_mass(0.0, 1.0, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(laplace_mass(1.0, -1.0, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(laplace_mass(1.0, 1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("mass second moment agrees with the transform curvature") {
  CHECK(mass_second_moment(0.8, 1.3, 0.5) ==
        doctest::Approx(0.64 + 0.52).epsilon(1e-15));
  double mass = 1.2, sigma0 = 0.9, t = 0.4, h = 1e-4;
  double curvature = (laplace_mass(mass, sigma0, t, h) - 2.0 +
                      laplace_mass(mass, sigma0, t, -h)) /
                     (h * h);
  CHECK(curvature ==
        doctest::Approx(mass_second_moment(mass, sigma0, t)).epsilon(1e-6));
}

TEST_CASE("first moment applies the heat semigroup") {
  GaussianFn phi{0.9, 0.4, 1.1};
  InitialMeasure mu = delta_at(0.3, 2.0);
  double a = 1.7, t = 0.6;
  MomentPair mp = sbm_moments(a, 0.0, phi, mu, t);
  CHECK(mp.first ==
        doctest::Approx(2.0 * heat_numeric(phi, a, t, 0.3)).epsilon(1e-10));
  // sigma_inf = 0 leaves only the transported square
  CHECK(mp.second == doctest::Approx(mp.first * mp.first).epsilon(1e-9));

  MomentPair flat = sbm_moments(1.0, 0.0, ConstantFn{0.7}, mu, t);
  CHECK(flat.first == doctest::Approx(1.4).epsilon(1e-14));

  InitialMeasure two;
  two.atoms = {{-0.5, 1.0}, {0.8, 0.5}};
  MomentPair pair = sbm_moments(a, 0.0, phi, two, t);
  CHECK(pair.first == doctest::Approx(heat_numeric(phi, a, t, -0.5) +
                                      0.5 * heat_numeric(phi, a, t, 0.8))
                          .epsilon(1e-10));
}

TEST_CASE("second moment quadrature matches a dense Riemann evaluation") {
  GaussianFn phi{1.0, 0.0, 1.0};
  GaussianFn sig{1.3, -0.2, 0.9};
  KernelModel m = make_model(ZeroFn{}, ConstantFn{1.0}, sig);
  InitialMeasure mu = delta_at(0.0, 1.0);
  double t = 0.5, a = 1.0, x0 = 0.0;

  double prod = second_moment_quadrature(m, phi, mu, t);

  // integrand F(s) = (T_{t-s}[ sigma (T_s phi)^2 ])(x0) on a dense grid
  auto big_g = [&](double s, double y) {
    double leg = heat_gaussian(phi, a, s, y);
    return field_eval(ScalarField{sig}, y) * leg * leg;
  };
  auto outer = [&](double s) {
    double v = a * (t - s);
    if (v < 1e-14) return big_g(s, x0);
    double root = std::sqrt(v);
    double step = 1e-3, sum = 0;
    long half = static_cast<long>(12.0 / step);
    for (long i = -half; i <= half; ++i) {
      double u = i * step;
      double w = (i == -half || i == half) ? 0.5 : 1.0;
      double n = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
      sum += w * n * big_g(s, x0 + u * root);
    }
    return sum * step;
  };
  long intervals = 200;
  double hs = t / intervals, simpson = outer(0.0) + outer(t);
  for (long i = 1; i < intervals; ++i)
    simpson += (i % 2 == 1 ? 4.0 : 2.0) * outer(i * hs);
  simpson *= hs / 3.0;
  double first = heat_gaussian(phi, a, t, x0);
  double riemann = first * first + simpson;

  CHECK(std::abs(prod - riemann) <= 1e-6 * std::max(1.0, std::abs(riemann)));
}

TEST_CASE("second moment quadrature collapses for flat arguments") {
  KernelModel m = make_model(ZeroFn{}, ConstantFn{1.0}, ConstantFn{0.8});
  InitialMeasure mu = delta_at(0.4, 1.5);
  double t = 0.7;
  CHECK(second_moment_quadrature(m, ConstantFn{1.0}, mu, t) ==
        doctest::Approx(mass_second_moment(1.5, 0.8, t)).epsilon(1e-12));
  CHECK(second_moment_quadrature(m, ConstantFn{1.0}, mu, 0.0) ==
        doctest::Approx(1.5 * 1.5).epsilon(1e-14));
}

TEST_CASE("flat-coefficient moments coincide across both oracles") {
  GaussianFn phi{0.8, 0.1, 1.2};
  InitialMeasure mu;
  mu.atoms = {{0.0, 0.6}, {1.0, 0.4}};
  double a = 1.44, sigma0 = 0.9, t = 0.3;
  KernelModel m = make_model(ZeroFn{}, ConstantFn{1.2}, ConstantFn{sigma0});
  double q = second_moment_quadrature(m, phi, mu, t);
  MomentPair s = sbm_moments(a, sigma0, phi, mu, t);
  CHECK(q == doctest::Approx(s.second).epsilon(1e-12));

  // identical inputs give identical outputs
  CHECK(second_moment_quadrature(m, phi, mu, t) == q);
}

TEST_CASE("oracle preconditions are enforced") {
  GaussianFn phi{1.0, 0.0, 1.0};
  InitialMeasure mu = delta_at(0.0, 1.0);
  KernelModel with_h =
      make_model(GaussianFn{1.0, 0.0, 1.0}, ConstantFn{1.0}, ConstantFn{1.0});
  CHECK_THROWS_AS(second_moment_quadrature(with_h, phi, mu, 0.5),
                  std::invalid_argument);
  KernelModel var_c =
      make_model(ZeroFn{}, AffineClampedFn{0.2, 0.5}, ConstantFn{1.0});
  CHECK_THROWS_AS(second_moment_quadrature(var_c, phi, mu, 0.5),
                  std::invalid_argument);
  KernelModel ok = make_model(ZeroFn{}, ConstantFn{1.0}, ConstantFn{1.0});
  InitialMeasure dens = delta_at(0.0, 1.0);
  dens.density.kind = MeasureDensity::Kind::Gaussian;
  dens.density.a = 0.0;
  dens.density.b = 1.0;
  dens.density.mass = 0.5;
  CHECK_THROWS_AS(second_moment_quadrature(ok, phi, dens, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(second_moment_quadrature(ok, BoxFn{0.0, 1.0, 1.0}, mu, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(sbm_moments(0.0, 1.0, phi, mu, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(sbm_moments(1.0, -0.1, phi, mu, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(sbm_moments(1.0, 1.0, phi, dens, 0.5), std::invalid_argument);
}

TEST_CASE("density bound formula") {
  CHECK(density_bound(2.0, 1.5, 0.3, 0.25) ==
        doctest::Approx(14.745873698591307).epsilon(1e-14));
  CHECK(density_bound(4.0, 1.5, 0.3, 0.25) ==
        doctest::Approx(2.0 * 14.745873698591307).epsilon(1e-14));
  CHECK(density_bound(1.0, 2.0, 0.5, 1.0) >
        density_bound(1.0, 1.0, 0.5, 1.0));
  CHECK_THROWS_AS(density_bound(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(density_bound(1.0, -1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(density_bound(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(density_bound(1.0, 1.0, 1.0, 0.0), std::invalid_argument);
}
