#include "sdsm/forward_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdsm/quadrature.hpp"

namespace sdsm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void draw_density(const MeasureDensity& d, long count, RngStream& rng,
                  std::vector<double>& out) {
  for (long j = 0; j < count; ++j) {
    switch (d.kind) {
      case MeasureDensity::Kind::Gaussian:
        out.push_back(d.a + d.b * rng.normal());
        break;
      case MeasureDensity::Kind::Uniform:
        out.push_back(d.a + (d.b - d.a) * rng.uniform());
        break;
      case MeasureDensity::Kind::None:
        break;
    }
  }
}

}  // namespace

ParticleEnsemble sample_initial_ensemble(const InitialMeasure& mu, double theta,
                                         RngStream& rng) {
  if (theta <= 0) throw std::invalid_argument("theta must be positive");
  ParticleEnsemble e;
  e.theta = theta;
  e.time = 0;

  // Atom counts by largest remainder: deterministic, total round(theta*mass).
  double atom_mass = 0;
  for (const auto& a : mu.atoms) atom_mass += a.mass;
  long target = std::lround(theta * atom_mass);
  std::vector<long> base(mu.atoms.size());
  std::vector<std::pair<double, size_t>> rem(mu.atoms.size());
  long assigned = 0;
  for (size_t i = 0; i < mu.atoms.size(); ++i) {
    double ideal = theta * mu.atoms[i].mass;
    base[i] = static_cast<long>(std::floor(ideal));
    rem[i] = {ideal - base[i], i};
    assigned += base[i];
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  long leftover = target - assigned;
  for (size_t j = 0; j < rem.size() && leftover > 0; ++j, --leftover)
    ++base[rem[j].second];
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    for (long c = 0; c < base[i]; ++c) e.positions.push_back(mu.atoms[i].x);

  if (mu.density.kind != MeasureDensity::Kind::None) {
    long count = std::lround(theta * mu.density.mass);
    draw_density(mu.density, count, rng, e.positions);
  }
  return e;
}

double branching_rate(const ParticleEnsemble& e, double gamma) {
  double n = static_cast<double>(e.count());
  return gamma * e.theta * e.theta * std::min(e.theta, n / e.theta);
}

void diffuse(ParticleEnsemble& e, const KernelModel& m, double duration,
             double dt_max, RngStream& rng) {
  if (duration < 0) throw std::invalid_argument("duration must be nonnegative");
  if (dt_max <= 0) throw std::invalid_argument("dt_max must be positive");
  if (duration == 0 || e.positions.empty()) {
    e.time += duration;
    return;
  }
  long steps = static_cast<long>(std::ceil(duration / dt_max));
  double dt = duration / steps;
  size_t n = e.positions.size();
  std::vector<double> z(n), move(n);
  for (long s = 0; s < steps; ++s) {
    StepCovariance sc = step_covariance(m, e.positions, dt);
    for (size_t i = 0; i < n; ++i) z[i] = rng.normal();
    chol_apply(sc.factor, z.data(), move.data());
    for (size_t i = 0; i < n; ++i) e.positions[i] += move[i];
  }
  e.time += duration;
}

void branch_once(ParticleEnsemble& e, const OffspringLaw& law, RngStream& rng) {
  if (e.positions.empty())
    throw std::invalid_argument("branch event on an empty population");
  size_t idx = static_cast<size_t>(rng.below(e.positions.size()));
  double x = e.positions[idx];
  long kids = sample_offspring(law, x, rng);
  if (kids == 0) {
    e.positions[idx] = e.positions.back();
    e.positions.pop_back();
  } else {
    for (long c = 1; c < kids; ++c) e.positions.push_back(x);
  }
}

namespace {

// Frozen-coefficient machinery for the event-driven run.  Between refreezes
// the Gram factor and the individual sds are held fixed; coincident newborns
// duplicate their parent's factor row, deaths remove one.
struct DenseMotion {
  const KernelModel* model = nullptr;
  int rank = 0;
  std::vector<double> rows;      // particle-major, stride = rank
  std::vector<double> indiv_sd;  // c(x_i)^2 + residual folded

  void refreeze(const std::vector<double>& x) {
    GramFactor g = gram_factor(*model, x);
    rank = g.factor.rank;
    rows = std::move(g.factor.rows);
    indiv_sd.resize(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      double c = field_eval(model->c, x[i]);
      indiv_sd[i] = std::sqrt(c * c + g.factor.residual_diag[i]);
    }
  }

  void advance(std::vector<double>& x, double delta, RngStream& rng,
               std::vector<double>& zeta) {
    double s = std::sqrt(delta);
    zeta.resize(rank);
    for (int k = 0; k < rank; ++k) zeta[k] = rng.normal();
    for (size_t i = 0; i < x.size(); ++i) {
      double common = 0;
      const double* row = rows.data() + i * static_cast<size_t>(rank);
      for (int k = 0; k < rank; ++k) common += row[k] * zeta[k];
      x[i] += s * (common + indiv_sd[i] * rng.normal());
    }
  }

  void birth(size_t parent, long copies) {
    for (long c = 0; c < copies; ++c) {
      size_t off = parent * static_cast<size_t>(rank);
      rows.insert(rows.end(), rows.begin() + off, rows.begin() + off + rank);
      indiv_sd.push_back(indiv_sd[parent]);
    }
  }

  void death(size_t idx, size_t last) {
    if (idx != last) {
      std::copy_n(rows.begin() + last * static_cast<size_t>(rank), rank,
                  rows.begin() + idx * static_cast<size_t>(rank));
      indiv_sd[idx] = indiv_sd[last];
    }
    rows.resize(last * static_cast<size_t>(rank));
    indiv_sd.pop_back();
  }
};

// Independent-motion path for h = 0 with constant c: each particle's position
// is materialized only when needed; the deferred increment is a single
// Gaussian, which is the exact law of the motion.
struct LazyMotion {
  double c0 = 0;
  std::vector<double> t_mat;

  void materialize(std::vector<double>& x, size_t i, double now,
                   RngStream& rng) {
    double dt = now - t_mat[i];
    if (dt > 0) {
      x[i] += c0 * std::sqrt(dt) * rng.normal();
      t_mat[i] = now;
    }
  }

  void materialize_all(std::vector<double>& x, double now, RngStream& rng) {
    for (size_t i = 0; i < x.size(); ++i) materialize(x, i, now, rng);
  }
};

}  // namespace

void run_forward_stream(const ForwardConfig& cfg, RngStream& rng,
                        const std::function<void(const ParticleEnsemble&)>& sink,
                        bool* truncated_out, long* branch_events_out) {
  if (cfg.dt_max <= 0) throw std::invalid_argument("dt_max must be positive");
  if (cfg.horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  for (size_t i = 0; i < cfg.snapshots.size(); ++i) {
    double s = cfg.snapshots[i];
    if (s < 0 || s > cfg.horizon)
      throw std::invalid_argument("snapshot outside [0, horizon]");
    if (i > 0 && s < cfg.snapshots[i - 1])
      throw std::invalid_argument("snapshots must be sorted");
  }
  validate_law(cfg.law, cfg.model.sigma_sup);

  ParticleEnsemble e = sample_initial_ensemble(cfg.mu, cfg.theta, rng);

  bool lazy = std::holds_alternative<ZeroFn>(cfg.model.h) &&
              (std::holds_alternative<ConstantFn>(cfg.model.c) ||
               std::holds_alternative<ZeroFn>(cfg.model.c));
  LazyMotion lm;
  DenseMotion dm;
  double window_end = kInf;
  if (lazy) {
    const auto* c = std::get_if<ConstantFn>(&cfg.model.c);
    lm.c0 = c ? c->value : 0.0;
    lm.t_mat.assign(e.positions.size(), 0.0);
  } else {
    dm.model = &cfg.model;
    dm.refreeze(e.positions);
    window_end = cfg.dt_max;
  }

  std::vector<double> zeta;
  size_t snap_i = 0;
  bool truncated = false;
  long events = 0;

  for (;;) {
    double rate = branching_rate(e, cfg.law.gamma);
    double ev = rate > 0 ? e.time + rng.exponential(rate) : kInf;
    double sn = snap_i < cfg.snapshots.size() ? cfg.snapshots[snap_i] : kInf;
    double tn = std::min(std::min(ev, sn), std::min(window_end, cfg.horizon));

    if (!lazy && tn > e.time) dm.advance(e.positions, tn - e.time, rng, zeta);
    e.time = tn;

    if (tn == sn) {
      if (lazy) lm.materialize_all(e.positions, tn, rng);
      sink(e);
      ++snap_i;
      continue;
    }
    if (tn >= cfg.horizon) break;
    if (tn == window_end) {
      dm.refreeze(e.positions);
      window_end = tn + cfg.dt_max;
      continue;
    }

    // branch event
    ++events;
    size_t n = e.positions.size();
    if (static_cast<double>(n) > e.theta * e.theta) truncated = true;
    size_t idx = static_cast<size_t>(rng.below(n));
    if (lazy) lm.materialize(e.positions, idx, tn, rng);
    double x = e.positions[idx];
    long kids = sample_offspring(cfg.law, x, rng);
    if (kids == 0) {
      size_t last = n - 1;
      e.positions[idx] = e.positions[last];
      e.positions.pop_back();
      if (lazy) {
        lm.t_mat[idx] = lm.t_mat[last];
        lm.t_mat.pop_back();
      } else {
        dm.death(idx, last);
      }
    } else if (kids > 1) {
      for (long c = 1; c < kids; ++c) e.positions.push_back(x);
      if (lazy) {
        for (long c = 1; c < kids; ++c) lm.t_mat.push_back(tn);
      } else {
        dm.birth(idx, kids - 1);
      }
      if (static_cast<long>(e.positions.size()) > cfg.population_cap)
        throw std::runtime_error("population cap exceeded: " +
                                 std::to_string(e.positions.size()) +
                                 " particles");
    }
  }

  if (truncated_out) *truncated_out = truncated;
  if (branch_events_out) *branch_events_out = events;
}

ForwardRun run_forward(const ForwardConfig& cfg, RngStream& rng) {
  ForwardRun run;
  run_forward_stream(
      cfg, rng, [&run](const ParticleEnsemble& e) { run.at.push_back(e); },
      &run.truncated, &run.branch_events);
  return run;
}

namespace {

// Per-slot factor of the moment functional, or identity for missing powers.
double slot_eval(const MultiFn& f, int slot, double x) {
  switch (f.kind) {
    case MultiFn::Kind::Constant:
      return slot == 0 ? f.value : 1.0;
    case MultiFn::Kind::GaussianProduct: {
      double u = (x - f.factor.center) / f.factor.width;
      return f.factor.amplitude * std::exp(-0.5 * u * u);
    }
    case MultiFn::Kind::CoordinatePoly: {
      int p = slot < static_cast<int>(f.powers.size()) ? f.powers[slot] : 0;
      double v = 1.0;
      for (int i = 0; i < p; ++i) v *= x;
      return v;
    }
  }
  return 1.0;
}

double perm_count(long n, int m) {
  double p = 1;
  for (int i = 0; i < m; ++i) p *= static_cast<double>(n - i);
  return p;
}

}  // namespace

TupleMoment empirical_moment(const ParticleEnsemble& e, const MultiFn& f, int m,
                             RngStream* rng) {
  if (m < 1) throw std::invalid_argument("moment order must be >= 1");
  TupleMoment out;
  long n = e.count();
  if (n < m) return out;
  double scale = std::pow(e.theta, -m);

  if (f.kind == MultiFn::Kind::Constant) {
    out.value = f.value * perm_count(n, m) * scale;
    return out;
  }

  if (m <= 3) {
    // Ordered distinct tuples of a product functional by inclusion-exclusion
    // over coincidence patterns.
    auto sum1 = [&](int a) {
      double s = 0;
      for (double x : e.positions) s += slot_eval(f, a, x);
      return s;
    };
    auto sum2 = [&](int a, int b) {
      double s = 0;
      for (double x : e.positions) s += slot_eval(f, a, x) * slot_eval(f, b, x);
      return s;
    };
    if (m == 1) {
      out.value = sum1(0) * scale;
      return out;
    }
    if (m == 2) {
      out.value = (sum1(0) * sum1(1) - sum2(0, 1)) * scale;
      return out;
    }
    double s1 = sum1(0), s2 = sum1(1), s3 = sum1(2);
    double s12 = sum2(0, 1), s13 = sum2(0, 2), s23 = sum2(1, 2);
    double s123 = 0;
    for (double x : e.positions)
      s123 += slot_eval(f, 0, x) * slot_eval(f, 1, x) * slot_eval(f, 2, x);
    out.value =
        (s1 * s2 * s3 - s12 * s3 - s13 * s2 - s23 * s1 + 2.0 * s123) * scale;
    return out;
  }

  double tuples = perm_count(n, m);
  if (tuples <= 2e7) {
    std::vector<int> idx(m);
    std::vector<double> pts(m);
    double total = 0;
    // nested distinct loops, depth-first
    std::function<void(int)> rec = [&](int depth) {
      if (depth == m) {
        for (int i = 0; i < m; ++i) pts[i] = e.positions[idx[i]];
        total += multi_eval(f, pts.data(), m);
        return;
      }
      for (int i = 0; i < n; ++i) {
        bool used = false;
        for (int d = 0; d < depth; ++d) used = used || idx[d] == i;
        if (used) continue;
        idx[depth] = i;
        rec(depth + 1);
      }
    };
    rec(0);
    out.value = total * scale;
    return out;
  }

  if (!rng)
    throw std::invalid_argument(
        "tuple count too large for exact summation; supply an RNG for "
        "subsampling");
  const long samples = 1000000;
  RunningStats stats;
  std::vector<size_t> idx(m);
  std::vector<double> pts(m);
  for (long s = 0; s < samples; ++s) {
    for (int d = 0; d < m; ++d) {
      for (;;) {
        size_t cand = static_cast<size_t>(rng->below(n));
        bool dup = false;
        for (int q = 0; q < d; ++q) dup = dup || idx[q] == cand;
        if (!dup) {
          idx[d] = cand;
          break;
        }
      }
    }
    for (int i = 0; i < m; ++i) pts[i] = e.positions[idx[i]];
    stats.push(multi_eval(f, pts.data(), m));
  }
  out.value = stats.mean() * tuples * scale;
  out.std_error = stats.std_error() * tuples * scale;
  out.subsampled = true;
  return out;
}

MartingaleReport martingale_diagnostics(
    const std::vector<std::vector<ParticleEnsemble>>& trajectories,
    const std::vector<double>& grid, const KernelModel& m,
    const OffspringLaw& law, const ScalarField& phi) {
  if (grid.size() < 2) throw std::invalid_argument("grid needs >= 2 points");
  MartingaleReport rep;
  RunningStats mart, qv_diff, qv_real, qv_pred;

  Support hs = field_effective_support(m.h, 1e-12);
  bool has_h = !std::holds_alternative<ZeroFn>(m.h);

  for (const auto& traj : trajectories) {
    if (traj.size() != grid.size())
      throw std::invalid_argument("trajectory/grid length mismatch");
    size_t g_n = grid.size();
    std::vector<double> v(g_n), drift(g_n), brate(g_n), mrate(g_n);
    for (size_t g = 0; g < g_n; ++g) {
      const ParticleEnsemble& w = traj[g];
      double inv = 1.0 / w.theta;
      double pv = 0, dv = 0, bv = 0;
      for (double x : w.positions) {
        pv += field_eval(phi, x);
        dv += 0.5 * a_eval(m, x) * field_d2(phi, x);
        double p = field_eval(phi, x);
        bv += law.gamma * law_sigma_p(law, x) * p * p;
      }
      v[g] = pv * inv;
      drift[g] = dv * inv;
      brate[g] = bv * inv;

      double motion = 0;
      if (has_h && !w.positions.empty()) {
        double lo = kInf, hi = -kInf;
        std::vector<double> u(w.positions.size());
        for (size_t i = 0; i < w.positions.size(); ++i) {
          u[i] = field_d1(phi, w.positions[i]);
          lo = std::min(lo, w.positions[i]);
          hi = std::max(hi, w.positions[i]);
        }
        auto integrand = [&](double z) {
          double s = 0;
          for (size_t i = 0; i < w.positions.size(); ++i)
            s += field_eval(m.h, z - w.positions[i]) * u[i];
          s *= inv;
          return s * s;
        };
        QuadratureResult q = adaptive_simpson(integrand, lo + hs.lo, hi + hs.hi,
                                              1e-10, 30);
        motion = q.value;
      }
      mrate[g] = motion;
    }

    double comp = 0, qv = 0, pred = 0;
    for (size_t g = 0; g + 1 < g_n; ++g) {
      double dt = grid[g + 1] - grid[g];
      double inc = 0.5 * (drift[g] + drift[g + 1]) * dt;
      comp += inc;
      double delta = v[g + 1] - v[g] - inc;
      qv += delta * delta;
      pred += 0.5 * (brate[g] + brate[g + 1] + mrate[g] + mrate[g + 1]) * dt;
    }
    double mval = v[g_n - 1] - v[0] - comp;
    mart.push(mval);
    qv_real.push(qv);
    qv_pred.push(pred);
    qv_diff.push(qv - pred);
  }

  rep.replicates = mart.count();
  rep.martingale_mean = mart.mean();
  rep.martingale_se = mart.std_error();
  rep.martingale_z = rep.martingale_se > 0 ? rep.martingale_mean / rep.martingale_se : 0;
  rep.qv_realized = qv_real.mean();
  rep.qv_realized_se = qv_real.std_error();
  rep.qv_predicted = qv_pred.mean();
  rep.qv_z = qv_diff.std_error() > 0 ? qv_diff.mean() / qv_diff.std_error() : 0;
  return rep;
}

}  // namespace sdsm
