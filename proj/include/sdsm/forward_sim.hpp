#pragma once
#include <functional>
#include <vector>

#include "sdsm/kernels.hpp"
#include "sdsm/measure.hpp"
#include "sdsm/offspring.hpp"
#include "sdsm/rng.hpp"
#include "sdsm/stats.hpp"

namespace sdsm {

// Interacting particle system at mass scale 1/theta.
struct ParticleEnsemble {
  double theta = 1;
  std::vector<double> positions;
  double time = 0;

  long count() const { return static_cast<long>(positions.size()); }
  double mass() const { return count() / theta; }
};

// round(theta * mass) particles: atoms get deterministic counts (largest
// remainders), the density component is sampled iid.
ParticleEnsemble sample_initial_ensemble(const InitialMeasure& mu, double theta,
                                         RngStream& rng);

// Total branch-event rate gamma * theta^2 * min(theta, N / theta): linear in
// the population until the mass exceeds theta, saturated beyond.
double branching_rate(const ParticleEnsemble& e, double gamma);

// Correlated diffusion over the given duration, split into
// ceil(duration/dt_max) equal steps; each step draws one joint Gaussian with
// the step covariance at the current positions.
void diffuse(ParticleEnsemble& e, const KernelModel& m, double duration,
             double dt_max, RngStream& rng);

// One branch event: uniform particle, offspring draw at its position, in-place
// population update (death removes by swap-with-last; births duplicate the
// parent's position).
void branch_once(ParticleEnsemble& e, const OffspringLaw& law, RngStream& rng);

struct ForwardConfig {
  KernelModel model;
  OffspringLaw law;
  double theta = 100;
  InitialMeasure mu;
  double horizon = 1;
  double dt_max = 1e-3;
  std::vector<double> snapshots;   // sorted, within [0, horizon]
  long population_cap = 1000000;   // hard particle limit; exceeding it throws
};

struct ForwardRun {
  std::vector<ParticleEnsemble> at;  // one per requested snapshot
  bool truncated = false;            // rate saturation was active at an event
  long branch_events = 0;
};

// Event-driven run: exponential branch clocks at the current rate, diffusion
// between events with coefficients frozen over dt_max windows, snapshots
// emitted at exact times (snapshot before any event at the same instant).
ForwardRun run_forward(const ForwardConfig& cfg, RngStream& rng);

// Same loop, streaming each snapshot to a callback instead of storing it.
void run_forward_stream(const ForwardConfig& cfg, RngStream& rng,
                        const std::function<void(const ParticleEnsemble&)>& sink,
                        bool* truncated = nullptr, long* branch_events = nullptr);

// theta^{-m} sum over ordered m-tuples of distinct particles of f.  Exact sum
// up to 1e8 tuples, uniform subsample beyond that (std_error then reflects the
// sampling noise; zero for the exact path).
struct TupleMoment {
  double value = 0;
  double std_error = 0;
  bool subsampled = false;
};
TupleMoment empirical_moment(const ParticleEnsemble& e, const MultiFn& f, int m,
                             RngStream* rng = nullptr);

// Path diagnostics for <phi, X_t> on a stored trajectory grid: drift-corrected
// terminal martingale value and realized vs predicted quadratic variation.
struct MartingaleReport {
  double martingale_mean = 0;
  double martingale_se = 0;
  double martingale_z = 0;
  double qv_realized = 0;
  double qv_realized_se = 0;
  double qv_predicted = 0;
  double qv_z = 0;
  long replicates = 0;
};
// trajectories[r][g] is replicate r observed at grid[g]; phi must have two
// derivatives (constant or gaussian kind).
MartingaleReport martingale_diagnostics(
    const std::vector<std::vector<ParticleEnsemble>>& trajectories,
    const std::vector<double>& grid, const KernelModel& m,
    const OffspringLaw& law, const ScalarField& phi);

}  // namespace sdsm
