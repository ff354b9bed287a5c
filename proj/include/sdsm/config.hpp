#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdsm/catalysts.hpp"
#include "sdsm/forward_sim.hpp"
#include "sdsm/functions.hpp"
#include "sdsm/kernels.hpp"
#include "sdsm/measure.hpp"
#include "sdsm/offspring.hpp"

namespace sdsm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ForwardSection {
  double theta = 100;
  double horizon = 0.5;
  double dt_max = 1e-3;
  std::vector<double> snapshots;
  long replicates = 1000;
};

struct DualSection {
  int m = 1;
  MultiFn f;
  double t = 0.5;
  long replicates = 10000;
};

struct MassCheckSection {
  std::vector<double> lambdas{-2, -1, -0.5};
  std::vector<double> times{0.25, 0.5};
  double z_limit = 3.0;
};

struct RescaleSection {
  std::vector<double> theta_scales{1, 2, 4, 8};
  double t = 0.25;
  std::vector<long> replicates;  // per scale; last value repeats if short
  double z_limit = 4.0;
};

struct SbmSection {
  double a_inf = 1;
  double sigma_inf = 1;
};

struct ExperimentConfig {
  KernelModel model;
  OffspringLaw law;
  InitialMeasure mu;
  ForwardSection forward;
  std::optional<DualSection> dual;
  std::optional<MassCheckSection> mass_check;
  std::optional<RescaleSection> rescale;
  std::optional<SbmSection> sbm;
  std::optional<CatalystConfig> catalyst;
  std::optional<ScalarField> phi;
  std::uint64_t seed = 1;
  int width = 0;  // 0: take SDSM_PARALLELISM, else 1
  std::string out_dir = ".";
};

// Parse + validate a JSON config document; throws ConfigError naming the
// offending key.  raw text is kept for the manifest echo.
ExperimentConfig parse_config(const std::string& json_text);

// Effective parallelism width: explicit value, else SDSM_PARALLELISM, else 1.
int resolve_width(int configured);

}  // namespace sdsm
