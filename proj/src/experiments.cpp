#include "sdsm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "sdsm/catalysts.hpp"
#include "sdsm/dual_sim.hpp"
#include "sdsm/forward_sim.hpp"
#include "sdsm/oracles.hpp"

namespace sdsm {

namespace {

// Branching density gamma * sigma_p when it does not depend on position.
std::optional<double> constant_sigma_eff(const OffspringLaw& law) {
  switch (law.kind) {
    case OffspringLaw::Kind::Binary:
    case OffspringLaw::Kind::CustomTable:
      return law_sigma_eff(law, 0.0);
    case OffspringLaw::Kind::ThreePoint:
      if (std::holds_alternative<ConstantFn>(law.sigma) ||
          std::holds_alternative<ZeroFn>(law.sigma))
        return law_sigma_eff(law, 0.0);
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> constant_c(const ScalarField& c) {
  if (const auto* k = std::get_if<ConstantFn>(&c)) return k->value;
  if (std::holds_alternative<ZeroFn>(c)) return 0.0;
  return std::nullopt;
}

bool oracle_test_fn(const ScalarField& phi) {
  return std::holds_alternative<ConstantFn>(phi) ||
         std::holds_alternative<GaussianFn>(phi);
}

bool purely_atomic(const InitialMeasure& mu) {
  return mu.density.kind == MeasureDensity::Kind::None ||
         mu.density.mass == 0;
}

MultiFn multi_from_field(const ScalarField& phi) {
  MultiFn f;
  if (const auto* k = std::get_if<ConstantFn>(&phi)) {
    f.kind = MultiFn::Kind::Constant;
    f.value = k->value;
    return f;
  }
  if (const auto* g = std::get_if<GaussianFn>(&phi)) {
    f.kind = MultiFn::Kind::GaussianProduct;
    f.factor = *g;
    return f;
  }
  throw std::invalid_argument(
      "test function must be constant or gaussian, got " +
      field_kind_name(phi));
}

MomentEstimate column_stats(const std::vector<double>& vals, int vpr, int col) {
  RunningStats rs;
  for (size_t i = static_cast<size_t>(col); i < vals.size();
       i += static_cast<size_t>(vpr))
    rs.push(vals[i]);
  MomentEstimate e;
  e.value = rs.mean();
  e.std_error = rs.std_error();
  e.n = rs.count();
  return e;
}

std::string z_cell(const MomentEstimate& e, double oracle) {
  if (e.std_error > 0) return fmt_double((e.value - oracle) / e.std_error);
  return fmt_double(e.value == oracle ? 0.0
                                      : std::numeric_limits<double>::infinity());
}

std::vector<std::string> oracle_row(const std::string& id, double param,
                                    const MomentEstimate& e,
                                    std::optional<double> oracle) {
  std::vector<std::string> row{id,
                               fmt_double(param),
                               fmt_double(e.value),
                               fmt_double(e.std_error),
                               fmt_int(e.n),
                               "",
                               ""};
  if (oracle) {
    row[5] = fmt_double(*oracle);
    row[6] = z_cell(e, *oracle);
  }
  return row;
}

const std::vector<std::string> kOracleColumns{
    "experiment_id", "param", "estimate", "std_error", "n", "oracle", "z"};

ForwardConfig base_forward(const ExperimentConfig& cfg) {
  ForwardConfig fc;
  fc.model = cfg.model;
  fc.law = cfg.law;
  fc.theta = cfg.forward.theta;
  fc.mu = cfg.mu;
  fc.horizon = cfg.forward.horizon;
  fc.dt_max = cfg.forward.dt_max;
  fc.snapshots = cfg.forward.snapshots;
  return fc;
}

}  // namespace

Table forward_table(const ExperimentConfig& cfg) {
  ForwardConfig fc = base_forward(cfg);
  const bool with_phi = cfg.phi.has_value();
  MultiFn mphi;
  if (with_phi) mphi = multi_from_field(*cfg.phi);
  const int per_snap = with_phi ? 4 : 2;
  const size_t ns = fc.snapshots.size();
  const int vpr = static_cast<int>(ns) * per_snap + 1;

  std::vector<double> vals = parallel_replicates(
      cfg.forward.replicates, resolve_width(cfg.width), cfg.seed, kTagForward,
      vpr, [&](long, RngStream& rng, double* out) {
        ForwardRun run = run_forward(fc, rng);
        for (size_t i = 0; i < ns; ++i) {
          const ParticleEnsemble& e = run.at[i];
          double m = e.mass();
          out[per_snap * i] = m;
          out[per_snap * i + 1] = m * m;
          if (with_phi) {
            double p = empirical_moment(e, mphi, 1, &rng).value;
            out[per_snap * i + 2] = p;
            out[per_snap * i + 3] = p * p;
          }
        }
        out[vpr - 1] = run.truncated ? 1.0 : 0.0;
      });

  const double m0 = cfg.mu.total_mass();
  std::optional<double> cse = constant_sigma_eff(cfg.law);
  std::optional<double> c0 = constant_c(cfg.model.c);
  const bool phi_oracle_ok = with_phi && c0 && purely_atomic(cfg.mu) &&
                             oracle_test_fn(*cfg.phi);
  const bool phi2_oracle_ok =
      phi_oracle_ok && std::holds_alternative<ZeroFn>(cfg.model.h);

  Table t;
  t.name = "forward";
  t.columns = kOracleColumns;
  for (size_t i = 0; i < ns; ++i) {
    double time = fc.snapshots[i];
    t.add_row(oracle_row("forward-mass", time,
                         column_stats(vals, vpr, per_snap * static_cast<int>(i)),
                         m0));
    std::optional<double> o2;
    if (cse) o2 = mass_second_moment(m0, *cse, time);
    t.add_row(oracle_row(
        "forward-mass2", time,
        column_stats(vals, vpr, per_snap * static_cast<int>(i) + 1), o2));
    if (with_phi) {
      std::optional<double> o1;
      if (phi_oracle_ok) {
        double a_marg = *c0 * *c0 + cfg.model.rho0;
        if (a_marg > 0) {
          o1 = sbm_moments(a_marg, 0.0, *cfg.phi, cfg.mu, time).first;
        } else {
          double s = 0;
          for (const auto& atom : cfg.mu.atoms)
            s += atom.mass * field_eval(*cfg.phi, atom.x);
          o1 = s;
        }
      }
      t.add_row(oracle_row(
          "forward-phi", time,
          column_stats(vals, vpr, per_snap * static_cast<int>(i) + 2), o1));
      std::optional<double> op2;
      if (phi2_oracle_ok)
        op2 = second_moment_quadrature(cfg.model, *cfg.phi, cfg.mu, time);
      t.add_row(oracle_row(
          "forward-phi2", time,
          column_stats(vals, vpr, per_snap * static_cast<int>(i) + 3), op2));
    }
  }
  t.add_row(oracle_row("forward-truncated", fc.horizon,
                       column_stats(vals, vpr, vpr - 1), std::nullopt));
  return t;
}

Table dual_table(const ExperimentConfig& cfg) {
  if (!cfg.dual)
    throw std::invalid_argument("dual estimation needs a \"dual\" section");
  const DualSection& d = *cfg.dual;
  MomentEstimate est = estimate_dual_moment(
      cfg.model, d.f, d.m, cfg.mu, d.t, d.replicates, cfg.forward.dt_max,
      cfg.seed, kTagDual, resolve_width(cfg.width));
  double bound = dual_moment_bound(d.m, multi_sup(d.f, d.m),
                                   cfg.model.sigma_sup, cfg.mu.total_mass());
  Table t;
  t.name = "dual";
  t.columns = kOracleColumns;
  // The oracle column carries the a priori moment bound, not an exact value;
  // no z is emitted for it.
  t.add_row({"dual-moment", fmt_double(d.t), fmt_double(est.value),
             fmt_double(est.std_error), fmt_int(est.n), fmt_double(bound), ""});
  return t;
}

DualityResult duality_check(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.dual)
    throw std::invalid_argument("duality check needs a \"dual\" section");
  const DualSection& d = *cfg.dual;
  int width = resolve_width(cfg.width);

  ForwardConfig fc = base_forward(cfg);
  fc.horizon = d.t;
  fc.snapshots = {d.t};

  std::vector<double> vals = parallel_replicates(
      cfg.forward.replicates, width, seed, kTagForward, 2,
      [&](long, RngStream& rng, double* out) {
        ForwardRun run = run_forward(fc, rng);
        out[0] = empirical_moment(run.at.front(), d.f, d.m, &rng).value;
        out[1] = run.truncated ? 1.0 : 0.0;
      });

  DualityResult r;
  r.forward = column_stats(vals, 2, 0);
  r.forward.meta["estimator"] = "forward";
  r.dual = estimate_dual_moment(cfg.model, d.f, d.m, cfg.mu, d.t, d.replicates,
                                cfg.forward.dt_max, seed, kTagDual, width);
  r.z = z_difference(r.forward, r.dual);
  r.bound = dual_moment_bound(d.m, multi_sup(d.f, d.m), cfg.model.sigma_sup,
                              cfg.mu.total_mass());
  r.truncated = column_stats(vals, 2, 1).value > 0;
  return r;
}

Table duality_table(const ExperimentConfig& cfg) {
  DualityResult r = duality_check(cfg, cfg.seed);
  Table t;
  t.name = "duality";
  t.columns = {"experiment_id",      "param",
               "forward_estimate",   "forward_std_error",
               "forward_n",          "dual_estimate",
               "dual_std_error",     "dual_n",
               "z",                  "bound",
               "truncated"};
  t.add_row({"check-duality", fmt_double(cfg.dual->t),
             fmt_double(r.forward.value), fmt_double(r.forward.std_error),
             fmt_int(r.forward.n), fmt_double(r.dual.value),
             fmt_double(r.dual.std_error), fmt_int(r.dual.n), fmt_double(r.z),
             fmt_double(r.bound), r.truncated ? "1" : "0"});
  return t;
}

Table mass_check_table(const ExperimentConfig& cfg, bool* all_within) {
  if (!cfg.mass_check)
    throw std::invalid_argument("mass check needs a \"mass_check\" section");
  std::optional<double> cse = constant_sigma_eff(cfg.law);
  if (!cse)
    throw std::invalid_argument(
        "the mass transform oracle needs a spatially constant branching "
        "density");
  const MassCheckSection& ms = *cfg.mass_check;

  std::vector<double> times = ms.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  ForwardConfig fc = base_forward(cfg);
  fc.horizon = times.back();
  fc.snapshots = times;
  const int vpr = static_cast<int>(times.size());

  std::vector<double> vals = parallel_replicates(
      cfg.forward.replicates, resolve_width(cfg.width), cfg.seed, kTagForward,
      vpr, [&](long, RngStream& rng, double* out) {
        ForwardRun run = run_forward(fc, rng);
        for (int i = 0; i < vpr; ++i) out[i] = run.at[i].mass();
      });

  const double m0 = cfg.mu.total_mass();
  const long n = cfg.forward.replicates;
  bool ok = true;

  Table t;
  t.name = "mass_check";
  t.columns = {"experiment_id", "lambda", "time",  "estimate",
               "std_error",     "n",      "oracle", "z"};
  for (double lambda : ms.lambdas) {
    for (int i = 0; i < vpr; ++i) {
      RunningStats rs;
      for (long rep = 0; rep < n; ++rep)
        rs.push(std::exp(lambda * vals[static_cast<size_t>(rep) * vpr + i]));
      MomentEstimate e;
      e.value = rs.mean();
      e.std_error = rs.std_error();
      e.n = rs.count();
      double oracle = laplace_mass(m0, *cse, times[i], lambda);
      double z = e.std_error > 0 ? (e.value - oracle) / e.std_error
                                 : (e.value == oracle ? 0.0 : 1e300);
      if (std::abs(z) > ms.z_limit) ok = false;
      t.add_row({"check-mass", fmt_double(lambda), fmt_double(times[i]),
                 fmt_double(e.value), fmt_double(e.std_error), fmt_int(e.n),
                 fmt_double(oracle), fmt_double(z)});
    }
  }
  if (all_within) *all_within = ok;
  return t;
}

ParticleEnsemble rescale_transform(const ParticleEnsemble& e,
                                   double theta_scale) {
  ParticleEnsemble out = e;
  double s2 = theta_scale * theta_scale;
  for (double& x : out.positions) x /= theta_scale;
  out.theta *= s2;
  out.time /= s2;
  return out;
}

bool error_trend_ok(const std::vector<double>& errs,
                    const std::vector<double>& std_errors) {
  size_t n = errs.size();
  if (n < 2) return true;
  for (size_t i = 0; i + 1 < n; ++i)
    if (errs[i + 1] - errs[i] > std_errors[i] + std_errors[i + 1])
      return false;
  if (errs.front() > 2.0 * std_errors.front() &&
      errs.back() >= errs.front() - (std_errors.front() + std_errors.back()))
    return false;
  return true;
}

Table rescale_table(const ExperimentConfig& cfg, bool* trend_ok,
                    bool* final_ok) {
  if (!cfg.rescale)
    throw std::invalid_argument("rescale run needs a \"rescale\" section");
  if (!cfg.phi)
    throw std::invalid_argument("rescale run needs a \"phi\" section");
  const RescaleSection& rs = *cfg.rescale;

  double a_inf, sigma_inf;
  if (cfg.sbm) {
    a_inf = cfg.sbm->a_inf;
    sigma_inf = cfg.sbm->sigma_inf;
  } else {
    std::optional<double> c0 = constant_c(cfg.model.c);
    std::optional<double> cse = constant_sigma_eff(cfg.law);
    if (!c0 || !cse)
      throw std::invalid_argument(
          "the rescale oracle needs a constant diffusion coefficient and a "
          "spatially constant branching density, or an explicit \"sbm\" "
          "section");
    a_inf = *c0 * *c0 + cfg.model.rho0;
    sigma_inf = *cse;
  }
  MomentPair oracle = sbm_moments(a_inf, sigma_inf, *cfg.phi, cfg.mu, rs.t);
  MultiFn mphi = multi_from_field(*cfg.phi);
  int width = resolve_width(cfg.width);

  Table t;
  t.name = "rescale";
  t.columns = kOracleColumns;
  std::vector<double> errs, err_ses, second_z;
  for (size_t si = 0; si < rs.theta_scales.size(); ++si) {
    double s = rs.theta_scales[si];
    double s2 = s * s;
    long reps = rs.replicates[std::min(si, rs.replicates.size() - 1)];

    ForwardConfig fc = base_forward(cfg);
    fc.horizon = s2 * rs.t;
    fc.snapshots = {fc.horizon};
    fc.mu.atoms.clear();
    for (const auto& atom : cfg.mu.atoms)
      fc.mu.atoms.push_back({atom.x * s, atom.mass * s2});
    fc.mu.density = cfg.mu.density;
    if (fc.mu.density.kind != MeasureDensity::Kind::None) {
      fc.mu.density.a *= s;
      fc.mu.density.b *= s;
      fc.mu.density.mass *= s2;
    }

    std::vector<double> vals = parallel_replicates(
        reps, width, cfg.seed,
        kTagRescaleBase + static_cast<std::uint32_t>(si), 2,
        [&](long, RngStream& rng, double* out) {
          ForwardRun run = run_forward(fc, rng);
          ParticleEnsemble scaled = rescale_transform(run.at.front(), s);
          double p = empirical_moment(scaled, mphi, 1, &rng).value;
          out[0] = p;
          out[1] = p * p;
        });

    MomentEstimate first = column_stats(vals, 2, 0);
    MomentEstimate second = column_stats(vals, 2, 1);
    t.add_row(oracle_row("rescale-first", s, first, oracle.first));
    t.add_row(oracle_row("rescale-second", s, second, oracle.second));
    errs.push_back(std::abs(second.value - oracle.second));
    err_ses.push_back(second.std_error);
    second_z.push_back(second.std_error > 0
                           ? (second.value - oracle.second) / second.std_error
                           : 0.0);
  }

  if (trend_ok) *trend_ok = error_trend_ok(errs, err_ses);
  if (final_ok) *final_ok = std::abs(second_z.back()) <= rs.z_limit;
  return t;
}

Table catalyst_table(const ExperimentConfig& cfg) {
  if (!cfg.catalyst)
    throw std::invalid_argument("catalyst run needs a \"catalyst\" section");
  CatalystConfig cc = *cfg.catalyst;
  cc.seed = cfg.seed;
  cc.width = resolve_width(cfg.width);
  std::vector<CatalystRow> rows = catalyst_experiment(cc);
  Table t;
  t.name = "catalyst";
  t.columns = {"experiment_id",     "k",
               "forward_estimate",  "forward_std_error",
               "forward_n",         "dual_estimate",
               "dual_std_error",    "dual_n",
               "z"};
  for (const auto& r : rows) {
    t.add_row({"catalyst", fmt_int(r.k), fmt_double(r.forward.value),
               fmt_double(r.forward.std_error), fmt_int(r.forward.n),
               fmt_double(r.dual.value), fmt_double(r.dual.std_error),
               fmt_int(r.dual.n), fmt_double(z_difference(r.forward, r.dual))});
  }
  return t;
}

Table kernel_info_table(const ExperimentConfig& cfg) {
  KernelInfo info = kernel_info(cfg.model);
  Table t;
  t.name = "kernel_info";
  t.columns = {"key", "value"};
  t.add_row({"h_kind", info.h_kind});
  t.add_row({"c_kind", info.c_kind});
  t.add_row({"sigma_kind", info.sigma_kind});
  t.add_row({"rho0", fmt_double(info.rho0)});
  t.add_row({"a_at_zero", fmt_double(info.a_at_zero)});
  t.add_row({"sigma_sup", fmt_double(info.sigma_sup)});
  t.add_row({"h_smooth", info.h_smooth ? "1" : "0"});
  switch (cfg.law.kind) {
    case OffspringLaw::Kind::Binary:
      t.add_row({"offspring_kind", "binary"});
      break;
    case OffspringLaw::Kind::ThreePoint:
      t.add_row({"offspring_kind", "three-point"});
      t.add_row({"offspring_k", fmt_int(cfg.law.k)});
      break;
    case OffspringLaw::Kind::CustomTable:
      t.add_row({"offspring_kind", "table"});
      break;
  }
  t.add_row({"offspring_gamma", fmt_double(cfg.law.gamma)});
  t.add_row({"theta", fmt_double(cfg.forward.theta)});
  t.add_row({"initial_mass", fmt_double(cfg.mu.total_mass())});
  return t;
}

Table sbm_oracle_table(const ExperimentConfig& cfg) {
  if (!cfg.sbm)
    throw std::invalid_argument("sbm oracle needs an \"sbm\" section");
  if (!cfg.phi)
    throw std::invalid_argument("sbm oracle needs a \"phi\" section");
  double t_eval = cfg.rescale ? cfg.rescale->t : cfg.forward.horizon;
  MomentPair mp =
      sbm_moments(cfg.sbm->a_inf, cfg.sbm->sigma_inf, *cfg.phi, cfg.mu, t_eval);
  Table t;
  t.name = "sbm_oracle";
  t.columns = {"experiment_id", "time", "first_moment", "second_moment"};
  t.add_row({"sbm-oracle", fmt_double(t_eval), fmt_double(mp.first),
             fmt_double(mp.second)});
  return t;
}

void run_report(const std::string& out_dir, const std::string& config_text,
                std::uint64_t seed, int width,
                const std::vector<Table>& tables) {
  Manifest m;
  m.config_text = config_text;
  m.seed = seed;
  m.width = width;
  for (const Table& t : tables) {
    std::string path = write_csv(out_dir, t);
    std::ifstream f(path, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    Manifest::Entry e;
    e.file = t.name + ".csv";
    e.rows = static_cast<long>(t.rows.size());
    e.sha256 = sha256_hex(buf.str());
    m.entries.push_back(std::move(e));
  }
  write_manifest(out_dir, m);
}

}  // namespace sdsm
