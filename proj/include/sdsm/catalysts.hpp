#pragma once
#include <vector>

#include "sdsm/forward_sim.hpp"
#include "sdsm/functions.hpp"
#include "sdsm/measure.hpp"
#include "sdsm/stats.hpp"

namespace sdsm {

// Locally finite measure with a linear-growth certificate: every window of
// length l carries mass at most b*l.
struct RadonMeasureSpec {
  std::vector<Atom> atoms;
  ScalarField density{ZeroFn{}};  // bounded, compactly supported kinds only
  double b = 1;
  double l = 1;
};

// eta((lo, hi]) : density part plus atoms in the half-open window.
double eta_mass_halfopen(const RadonMeasureSpec& eta, double lo, double hi);
// eta([lo, hi]) : atoms at both endpoints included.
double eta_mass_closed(const RadonMeasureSpec& eta, double lo, double hi);
// Sliding-window check of eta([x, x+l]) <= b*l on a grid of step l/100 over
// the support (padded by l); returns the largest window mass found.
double certificate_window_sup(const RadonMeasureSpec& eta);
// Throws when the certificate fails beyond tolerance.
void require_certificate(const RadonMeasureSpec& eta, double tol = 1e-9);

// Piecewise-constant density with value (k/l) * eta(bin) on each half-open bin
// (i l/k, (i+1) l/k].  Total mass of eta is preserved.
BinnedDensityFn bin_measure(const RadonMeasureSpec& eta, long k);

// integral of phi against the binned density.
double binned_pairing(const BinnedDensityFn& d, const ScalarField& phi);
// integral of phi against eta itself (atoms exactly, density by closed form /
// quadrature).
double eta_pairing(const RadonMeasureSpec& eta, const ScalarField& phi);

struct CatalystRow {
  long k = 0;
  MomentEstimate forward;
  MomentEstimate dual;
};

struct CatalystConfig {
  RadonMeasureSpec eta;
  std::vector<long> k_list;
  ScalarField h{ZeroFn{}};
  ScalarField c{ConstantFn{1.0}};
  double c_floor = 0.1;  // declared lower bound on |c|; checked on a grid
  InitialMeasure mu;
  double theta = 100;
  long offspring_k = 0;  // three-point branch parameter; 0 picks automatically
  MultiFn f;
  int m = 1;
  double t = 0.25;
  double dt_max = 1e-3;
  long forward_replicates = 200;
  long dual_replicates = 2000;
  std::uint64_t seed = 1;
  int width = 1;
};

// For each k: builds sigma_k = bin_measure(eta, k), runs forward moments and
// dual estimates under the same model, returns the convergence table.
std::vector<CatalystRow> catalyst_experiment(const CatalystConfig& cfg);

}  // namespace sdsm
