#include "sdsm/dual_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "sdsm/forward_sim.hpp"
#include "sdsm/parallel.hpp"

namespace sdsm {

CoalescentPath sample_coalescent(int m, double t, RngStream& rng) {
  if (m < 1) throw std::invalid_argument("coalescent needs m >= 1");
  if (t < 0) throw std::invalid_argument("horizon must be nonnegative");
  CoalescentPath path;
  path.m0 = m;
  path.horizon = t;
  double s = 0;
  for (int l = m; l >= 2; --l) {
    s += rng.exponential(0.5 * l * (l - 1));
    if (s >= t) break;
    // ordered pair uniform among the l(l-1) ordered distinct slot pairs
    uint64_t r = rng.below(static_cast<uint64_t>(l) * (l - 1));
    int i = static_cast<int>(r / (l - 1));
    int j = static_cast<int>(r % (l - 1));
    if (j >= i) ++j;
    path.jump_times.push_back(s);
    path.pairs.emplace_back(i + 1, j + 1);
  }
  return path;
}

std::pair<std::vector<double>, double> expand_points(
    const std::vector<double>& pts, std::pair<int, int> pair) {
  if (pts.empty()) throw std::invalid_argument("expand on an empty configuration");
  int l = static_cast<int>(pts.size()) + 1;
  auto [i, j] = pair;
  if (i == j || i < 1 || j < 1 || i > l || j > l)
    throw std::invalid_argument("expansion pair out of range");
  double dup = pts.back();
  std::vector<double> out(static_cast<size_t>(l));
  size_t src = 0;
  for (int slot = 1; slot <= l; ++slot) {
    if (slot == i || slot == j)
      out[slot - 1] = dup;
    else
      out[slot - 1] = pts[src++];
  }
  return {std::move(out), dup};
}

double exp_weight(const CoalescentPath& path) {
  double acc = 0;
  double prev = 0;
  int l = path.m0;
  for (double tau : path.jump_times) {
    acc += 0.5 * l * (l - 1.0) * (tau - prev);
    prev = tau;
    --l;
  }
  acc += 0.5 * l * (l - 1.0) * (path.horizon - prev);
  return std::exp(acc);
}

double dual_replicate(const KernelModel& m_, const MultiFn& f, int m,
                      const InitialMeasure& mu, const CoalescentPath& path,
                      double dt_max, RngStream& rng, DualTrace* trace) {
  if (path.m0 != m) throw std::invalid_argument("coalescent level mismatch");
  int jumps = static_cast<int>(path.jump_times.size());
  int n0 = m - jumps;
  double mass = mu.total_mass();

  ParticleEnsemble pts;
  pts.theta = 1;
  pts.positions.reserve(m);
  for (int i = 0; i < n0; ++i) pts.positions.push_back(mu.sample(rng));

  double weight = std::pow(mass, n0) * exp_weight(path);
  double sigma_product = 1;

  // The dual function is a composition: innermost semigroup leg of length
  // tau_1, a merge, the next leg, ..., outermost leg of length t - tau_K.
  // Evaluation therefore walks the recorded jumps from the last to the first.
  double leg_end = path.horizon;
  for (int r = jumps - 1; r >= 0; --r) {
    diffuse(pts, m_, leg_end - path.jump_times[r], dt_max, rng);
    double sv = sigma_eval(m_, pts.positions.back());
    sigma_product *= sv;
    auto [expanded, dup] = expand_points(pts.positions, path.pairs[r]);
    pts.positions = std::move(expanded);
    leg_end = path.jump_times[r];
  }
  diffuse(pts, m_, leg_end, dt_max, rng);

  if (trace) {
    trace->expansions = jumps;
    trace->final_points = static_cast<int>(pts.positions.size());
    trace->sigma_product = sigma_product;
  }
  return weight * sigma_product *
         multi_eval(f, pts.positions.data(), static_cast<int>(pts.positions.size()));
}

MomentEstimate estimate_dual_moment(const KernelModel& m_, const MultiFn& f,
                                    int m, const InitialMeasure& mu, double t,
                                    long replicates, double dt_max,
                                    std::uint64_t seed, std::uint32_t tag,
                                    int width) {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  std::vector<double> vals = parallel_replicates(
      replicates, width, seed, tag, 1,
      [&](long, RngStream& rng, double* out) {
        CoalescentPath path = sample_coalescent(m, t, rng);
        out[0] = dual_replicate(m_, f, m, mu, path, dt_max, rng);
      });
  MomentEstimate est = summarize(vals);
  est.meta["estimator"] = "dual";
  est.meta["m"] = std::to_string(m);
  return est;
}

double dual_moment_bound(int m, double f_sup, double sigma_sup, double mass) {
  if (m < 1) throw std::invalid_argument("moment order must be >= 1");
  double total = 0;
  for (int k = 0; k < m; ++k) {
    double term = f_sup * std::pow(0.5, k) * std::pow(static_cast<double>(m), k) *
                  std::pow(m - 1.0, k) * std::pow(sigma_sup, k) *
                  std::pow(mass, m - k);
    total += term;
  }
  return total;
}

}  // namespace sdsm
