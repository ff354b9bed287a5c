#pragma once
#include <span>
#include <string>

#include "sdsm/functions.hpp"
#include "sdsm/linalg.hpp"

namespace sdsm {

// Motion/branching coefficient bundle.  h is the interaction kernel (square
// integrable), c the individual diffusion coefficient (Lipschitz), sigma the
// branching density (nonnegative, bounded).
struct KernelModel {
  ScalarField h{ZeroFn{}};
  ScalarField c{ConstantFn{1.0}};
  ScalarField sigma{ConstantFn{1.0}};

  double rho0 = 0;        // rho(0), cached at construction
  double sigma_sup = 0;   // sup sigma, cached
  bool h_smooth = true;   // false when h is box/tabulated (kinked correlation)
};

KernelModel make_model(ScalarField h, ScalarField c, ScalarField sigma);

// rho(x) = int h(y - x) h(y) dy.  Closed form for zero/box/gaussian h,
// adaptive quadrature for tabulated h.
double rho_eval(const KernelModel& m, double x);
// a(x) = c(x)^2 + rho(0).
double a_eval(const KernelModel& m, double x);
double c_eval(const KernelModel& m, double x);
double sigma_eval(const KernelModel& m, double x);

// Descriptive record for reporting.
struct KernelInfo {
  std::string h_kind;
  std::string c_kind;
  std::string sigma_kind;
  double rho0 = 0;
  double a_at_zero = 0;
  double sigma_sup = 0;
  bool h_smooth = true;
};
KernelInfo kernel_info(const KernelModel& m);

// Covariance of one motion step of length dt at the given positions:
// Sigma_ij = dt * (c(x_i)^2 delta_ij + rho(x_i - x_j)), with its factor.
struct StepCovariance {
  SymMatrix sigma_dt;
  CholFactor factor;
  double jitter_used = 0;
};
StepCovariance step_covariance(const KernelModel& m, std::span<const double> x,
                               double dt);

// Low-rank factor of the interaction Gram matrix [rho(x_i - x_j)] alone.
// Residual diagonal is returned for folding into the individual variance.
struct GramFactor {
  LowRankFactor factor;
  double jitter_used = 0;
};
GramFactor gram_factor(const KernelModel& m, std::span<const double> x);

}  // namespace sdsm
