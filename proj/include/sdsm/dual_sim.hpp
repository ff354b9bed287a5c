#pragma once
#include <cstdint>
#include <utility>
#include <vector>

#include "sdsm/kernels.hpp"
#include "sdsm/measure.hpp"
#include "sdsm/rng.hpp"
#include "sdsm/stats.hpp"

namespace sdsm {

// Pure-death level process started at m: level l waits an exponential with
// rate l(l-1)/2, then an ordered pair (i,j), i != j, uniform among l(l-1),
// merges the level to l-1.  Jumps beyond the horizon are discarded.
struct CoalescentPath {
  int m0 = 0;
  double horizon = 0;
  std::vector<double> jump_times;            // increasing, within (0, horizon)
  std::vector<std::pair<int, int>> pairs;    // 1-based slots at the pre-jump level
};

CoalescentPath sample_coalescent(int m, double t, RngStream& rng);

// Rebuild an l-point configuration from an (l-1)-point one by duplicating the
// last coordinate into slots i and j of the recorded pair; the remaining
// coordinates fill the other slots in increasing slot order.  Returns the new
// configuration and the duplicated value.
std::pair<std::vector<double>, double> expand_points(
    const std::vector<double>& pts, std::pair<int, int> pair);

// exp{ 1/2 int_0^horizon M_s (M_s - 1) ds } for the path's level process.
double exp_weight(const CoalescentPath& path);

struct DualTrace {
  int expansions = 0;
  int final_points = 0;
  double sigma_product = 1;
};

// One replicate of the dual representation of the m-th moment: run the
// coalescent backward from t, diffuse between jumps with the same correlated
// motion as the forward system, weight each merge by sigma at the duplicated
// point, finish with f at the initial configuration pushed through mu.
double dual_replicate(const KernelModel& m_, const MultiFn& f, int m,
                      const InitialMeasure& mu, const CoalescentPath& path,
                      double dt_max, RngStream& rng, DualTrace* trace = nullptr);

// Monte Carlo average of dual_replicate over fresh coalescent draws.
// Replicates are distributed over width threads; the estimate is independent
// of width for a fixed seed.
MomentEstimate estimate_dual_moment(const KernelModel& m_, const MultiFn& f,
                                    int m, const InitialMeasure& mu, double t,
                                    long replicates, double dt_max,
                                    std::uint64_t seed, std::uint32_t tag,
                                    int width);

// A priori bound on the m-th moment magnitude:
// |E <f, X_t^m>| <= sup|f| sum_{k=0}^{m-1} 2^{-k} m^k (m-1)^k sup(sigma)^k mass^{m-k}.
double dual_moment_bound(int m, double f_sup, double sigma_sup, double mass);

}  // namespace sdsm
