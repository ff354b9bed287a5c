#include "sdsm/catalysts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdsm/dual_sim.hpp"
#include "sdsm/parallel.hpp"
#include "sdsm/quadrature.hpp"

namespace sdsm {

namespace {

long long bin_of(double x, double bw) {
  return static_cast<long long>(std::ceil(x / bw)) - 1;
}

Support eta_hull(const RadonMeasureSpec& eta) {
  double lo = 0, hi = 0;
  bool any = false;
  for (const auto& a : eta.atoms) {
    lo = any ? std::min(lo, a.x) : a.x;
    hi = any ? std::max(hi, a.x) : a.x;
    any = true;
  }
  Support ds = field_effective_support(eta.density, 1e-14);
  if (!(ds.lo == 0 && ds.hi == 0) || field_eval(eta.density, 0) != 0) {
    if (!ds.bounded)
      throw std::invalid_argument(
          "catalyst density must have bounded (or decaying) support");
    lo = any ? std::min(lo, ds.lo) : ds.lo;
    hi = any ? std::max(hi, ds.hi) : ds.hi;
    any = true;
  }
  if (!any) return {0, 0, true};
  return {lo, hi, true};
}

}  // namespace

double eta_mass_halfopen(const RadonMeasureSpec& eta, double lo, double hi) {
  double m = field_integral(eta.density, lo, hi);
  for (const auto& a : eta.atoms)
    if (a.x > lo && a.x <= hi) m += a.mass;
  return m;
}

double eta_mass_closed(const RadonMeasureSpec& eta, double lo, double hi) {
  double m = field_integral(eta.density, lo, hi);
  for (const auto& a : eta.atoms)
    if (a.x >= lo && a.x <= hi) m += a.mass;
  return m;
}

double certificate_window_sup(const RadonMeasureSpec& eta) {
  Support hull = eta_hull(eta);
  double sup = 0;
  double step = eta.l / 100.0;
  double start = hull.lo - eta.l;
  long steps = static_cast<long>(std::ceil((hull.hi - start) / step)) + 1;
  for (long i = 0; i <= steps; ++i) {
    double x = start + i * step;
    sup = std::max(sup, eta_mass_closed(eta, x, x + eta.l));
  }
  return sup;
}

void require_certificate(const RadonMeasureSpec& eta, double tol) {
  if (eta.b <= 0 || eta.l <= 0)
    throw std::invalid_argument("catalyst certificate needs positive b and l");
  double sup = certificate_window_sup(eta);
  if (sup > eta.b * eta.l + tol)
    throw std::invalid_argument(
        "catalyst window certificate fails: found window mass " +
        std::to_string(sup) + " > b*l = " + std::to_string(eta.b * eta.l));
}

BinnedDensityFn bin_measure(const RadonMeasureSpec& eta, long k) {
  if (k < 1) throw std::invalid_argument("bin count must be >= 1");
  double bw = eta.l / static_cast<double>(k);
  Support hull = eta_hull(eta);
  BinnedDensityFn out;
  out.bin_width = bw;
  if (hull.lo == 0 && hull.hi == 0 && eta.atoms.empty() &&
      std::holds_alternative<ZeroFn>(eta.density)) {
    out.i_min = 0;
    return out;
  }
  long long i_lo = bin_of(hull.lo, bw);
  long long i_hi = bin_of(hull.hi, bw);
  // An atom exactly on the lower hull edge belongs to the bin below it.
  for (const auto& a : eta.atoms) i_lo = std::min(i_lo, bin_of(a.x, bw));
  out.i_min = i_lo;
  out.values.resize(static_cast<size_t>(i_hi - i_lo + 1), 0.0);
  double scale = static_cast<double>(k) / eta.l;  // 1/bw
  for (long long i = i_lo; i <= i_hi; ++i) {
    double lo = i * bw, hi = (i + 1) * bw;
    out.values[static_cast<size_t>(i - i_lo)] =
        scale * eta_mass_halfopen(eta, lo, hi);
  }
  return out;
}

double binned_pairing(const BinnedDensityFn& d, const ScalarField& phi) {
  double s = 0;
  for (size_t j = 0; j < d.values.size(); ++j) {
    if (d.values[j] == 0) continue;
    double lo = (d.i_min + static_cast<long long>(j)) * d.bin_width;
    s += d.values[j] * field_integral(phi, lo, lo + d.bin_width);
  }
  return s;
}

double eta_pairing(const RadonMeasureSpec& eta, const ScalarField& phi) {
  double s = 0;
  for (const auto& a : eta.atoms) s += a.mass * field_eval(phi, a.x);
  Support ds = field_effective_support(eta.density, 1e-14);
  if (ds.bounded && ds.hi > ds.lo) {
    auto integrand = [&](double y) {
      return field_eval(eta.density, y) * field_eval(phi, y);
    };
    QuadratureResult q = adaptive_simpson(integrand, ds.lo, ds.hi, 1e-12, 40);
    s += q.value;
  }
  return s;
}

std::vector<CatalystRow> catalyst_experiment(const CatalystConfig& cfg) {
  require_certificate(cfg.eta);
  if (cfg.c_floor <= 0)
    throw std::invalid_argument("catalyst runs need a positive floor on |c|");
  for (double x = -10.0; x <= 10.0; x += 0.05) {
    if (std::abs(field_eval(cfg.c, x)) < cfg.c_floor - 1e-12)
      throw std::invalid_argument(
          "diffusion coefficient violates its declared floor at x = " +
          std::to_string(x));
  }

  std::vector<CatalystRow> rows;
  for (size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    long k = cfg.k_list[ki];
    BinnedDensityFn sigma_k = bin_measure(cfg.eta, k);
    KernelModel model = make_model(cfg.h, cfg.c, sigma_k);

    // Power of two at least 4x the smallest admissible branch parameter for
    // sup sigma_k, floored at 4096: the realized branching density then
    // overshoots sigma_k by at most 1/64.
    long off_k = cfg.offspring_k;
    if (off_k <= 0) {
      long valid = 4;
      while (std::sqrt(static_cast<double>(valid)) * model.sigma_sup + 1.0 >
             static_cast<double>(valid - 1))
        valid *= 2;
      off_k = std::max(4096L, 4 * valid);
    }
    OffspringLaw law = three_point_law(off_k, model.sigma);

    ForwardConfig fc;
    fc.model = model;
    fc.law = law;
    fc.theta = cfg.theta;
    fc.mu = cfg.mu;
    fc.horizon = cfg.t;
    fc.dt_max = cfg.dt_max;
    fc.snapshots = {cfg.t};

    std::vector<double> fw = parallel_replicates(
        cfg.forward_replicates, cfg.width, cfg.seed,
        kTagCatalystBase + 2 * static_cast<std::uint32_t>(ki), 1,
        [&](long, RngStream& rng, double* out) {
          ForwardRun run = run_forward(fc, rng);
          out[0] = empirical_moment(run.at.front(), cfg.f, cfg.m).value;
        });

    CatalystRow row;
    row.k = k;
    row.forward = summarize(fw);
    row.dual = estimate_dual_moment(
        model, cfg.f, cfg.m, cfg.mu, cfg.t, cfg.dual_replicates, cfg.dt_max,
        cfg.seed, kTagCatalystBase + 2 * static_cast<std::uint32_t>(ki) + 1,
        cfg.width);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sdsm
