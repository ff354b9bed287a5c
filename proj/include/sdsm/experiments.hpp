#pragma once
#include <cstdint>
#include <functional>
#include <vector>

#include "sdsm/config.hpp"
#include "sdsm/parallel.hpp"
#include "sdsm/report.hpp"
#include "sdsm/stats.hpp"

namespace sdsm {

// simulate-forward: one row per (snapshot, statistic).
Table forward_table(const ExperimentConfig& cfg);

// estimate-dual: single-row table plus the a priori bound column.
Table dual_table(const ExperimentConfig& cfg);

// check-duality: forward moments vs dual estimates at shared (model, f, mu,
// t, dt_max).
struct DualityResult {
  MomentEstimate forward;
  MomentEstimate dual;
  double z = 0;
  double bound = 0;
  bool truncated = false;
};
DualityResult duality_check(const ExperimentConfig& cfg, std::uint64_t seed);
Table duality_table(const ExperimentConfig& cfg);

// check-mass: empirical exponential mass statistics vs laplace_mass.
Table mass_check_table(const ExperimentConfig& cfg, bool* all_within);

// Rescaled copy of a snapshot: positions divided by s, mass unit divided by
// s^2 (theta multiplied by s^2), time label divided by s^2.
ParticleEnsemble rescale_transform(const ParticleEnsemble& e, double theta_scale);

// Convergence verdict for a sequence of absolute errors with standard errors:
// no step may grow by more than the combined standard errors, and when the
// first error is clearly resolved (above twice its own standard error) the
// last must undercut it by more than the joint noise.  Errors at noise level
// order randomly, so a raw-monotonicity demand would fail converged runs.
bool error_trend_ok(const std::vector<double>& errs,
                    const std::vector<double>& std_errors);

// rescale-experiment: per theta_scale, forward moments of <phi, X> after
// rescaling vs sbm_moments oracle.
Table rescale_table(const ExperimentConfig& cfg, bool* trend_ok, bool* final_ok);

// catalyst-experiment rows.
Table catalyst_table(const ExperimentConfig& cfg);

// kernel-info and sbm-oracle single-row tables.
Table kernel_info_table(const ExperimentConfig& cfg);
Table sbm_oracle_table(const ExperimentConfig& cfg);

// Writes the tables for one subcommand run plus manifest.json; byte-identical
// across repeated runs with the same config and seed.
void run_report(const std::string& out_dir, const std::string& config_text,
                std::uint64_t seed, int width, const std::vector<Table>& tables);

}  // namespace sdsm
