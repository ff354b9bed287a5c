#pragma once
#include <vector>

#include "sdsm/kernels.hpp"
#include "sdsm/measure.hpp"

namespace sdsm {

// Closed-form total-mass Laplace functional of the critical binary branching
// limit with branching density sigma0:
// E exp(lambda <1, X_t>) = exp( 2 mass lambda / (2 - sigma0 lambda t) ),
// valid for sigma0 lambda t < 2 (throws outside the domain).
double laplace_mass(double mass, double sigma0, double t, double lambda);

// E <1, X_t>^2 = mass^2 + sigma0 t mass for the same limit.
double mass_second_moment(double mass, double sigma0, double t);

// Second moment of <phi, X_t> for decoupled motion (h = 0, constant c):
// <T_t phi, mu>^2 + int_0^t <T_{t-s}[ sigma (T_s phi)^2 ], mu> ds,
// with T the heat semigroup of variance coefficient a = c^2.  Time integral by
// 64-node Gauss-Legendre, space integrals adaptive to abs tol 1e-8.
// phi must be a gaussian or constant field; mu must be purely atomic.
double second_moment_quadrature(const KernelModel& m, const ScalarField& phi,
                                const InitialMeasure& mu, double t);

// First and second moments of <phi, X_t> for super-Brownian motion with flat
// motion coefficient a_inf and flat branching density sigma_inf.
struct MomentPair {
  double first = 0;
  double second = 0;
};
MomentPair sbm_moments(double a_inf, double sigma_inf, const ScalarField& phi,
                       const InitialMeasure& mu, double t);

// Diagnostic-scale sup bound on the time-t density of mass b spread from an
// interval of length l by diffusivity at least eps:
// b * (2 l + sqrt(2 pi eps t)) / sqrt(t).
double density_bound(double b, double l, double eps, double t);

}  // namespace sdsm
