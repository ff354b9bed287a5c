#include "sdsm/config.hpp"

#include <cstdlib>

#include "json.hpp"

namespace sdsm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

const json& need(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) fail("missing key \"" + ctx + "." + key + "\"");
  return *it;
}

double num(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number()) fail("\"" + ctx + "." + key + "\" must be a number");
  return v.get<double>();
}

double num_or(const json& j, const char* key, const std::string& ctx,
              double fallback) {
  if (!j.contains(key)) return fallback;
  return num(j, key, ctx);
}

long integer(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_number_integer()) fail("\"" + ctx + "." + key + "\" must be an integer");
  return v.get<long>();
}

long integer_or(const json& j, const char* key, const std::string& ctx,
                long fallback) {
  if (!j.contains(key)) return fallback;
  return integer(j, key, ctx);
}

std::string text(const json& j, const char* key, const std::string& ctx) {
  const json& v = need(j, key, ctx);
  if (!v.is_string()) fail("\"" + ctx + "." + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<double> num_list(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail("\"" + ctx + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail("\"" + ctx + "\" must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ScalarField parse_field(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail("\"" + ctx + "\" must be an object with a \"kind\"");
  std::string kind = text(j, "kind", ctx);
  if (kind == "zero") return ZeroFn{};
  if (kind == "constant") return ConstantFn{num(j, "value", ctx)};
  if (kind == "gaussian")
    return GaussianFn{num(j, "amplitude", ctx), num(j, "center", ctx),
                      num(j, "width", ctx)};
  if (kind == "box")
    return BoxFn{num(j, "left", ctx), num(j, "right", ctx), num(j, "height", ctx)};
  if (kind == "step")
    return StepFn{num(j, "left", ctx), num(j, "right", ctx),
                  num(j, "inside", ctx), num(j, "outside", ctx)};
  if (kind == "affine-clamped")
    return AffineClampedFn{num(j, "slope", ctx), num(j, "floor", ctx)};
  if (kind == "tabulated") {
    TabulatedFn t;
    t.x = num_list(need(j, "x", ctx), ctx + ".x");
    t.v = num_list(need(j, "v", ctx), ctx + ".v");
    if (t.x.size() != t.v.size() || t.x.size() < 2)
      fail("\"" + ctx + "\": x and v need equal length >= 2");
    for (size_t i = 1; i < t.x.size(); ++i)
      if (!(t.x[i] > t.x[i - 1])) fail("\"" + ctx + ".x\" must be increasing");
    return t;
  }
  fail("\"" + ctx + ".kind\" unknown: \"" + kind + "\"");
}

MultiFn parse_multi(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail("\"" + ctx + "\" must be an object with a \"kind\"");
  std::string kind = text(j, "kind", ctx);
  MultiFn f;
  if (kind == "constant") {
    f.kind = MultiFn::Kind::Constant;
    f.value = num(j, "value", ctx);
    return f;
  }
  if (kind == "gaussian-product") {
    f.kind = MultiFn::Kind::GaussianProduct;
    f.factor = GaussianFn{num(j, "amplitude", ctx), num(j, "center", ctx),
                          num(j, "width", ctx)};
    if (f.factor.width <= 0) fail("\"" + ctx + ".width\" must be positive");
    return f;
  }
  if (kind == "coordinate-poly") {
    f.kind = MultiFn::Kind::CoordinatePoly;
    const json& p = need(j, "powers", ctx);
    if (!p.is_array() || p.empty())
      fail("\"" + ctx + ".powers\" must be a nonempty integer array");
    for (const auto& e : p) {
      if (!e.is_number_integer() || e.get<long>() < 0)
        fail("\"" + ctx + ".powers\" must contain nonnegative integers");
      f.powers.push_back(e.get<int>());
    }
    return f;
  }
  fail("\"" + ctx + ".kind\" unknown: \"" + kind + "\"");
}

std::vector<Atom> parse_atoms(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail("\"" + ctx + "\" must be an array");
  std::vector<Atom> out;
  for (size_t i = 0; i < v.size(); ++i) {
    std::string actx = ctx + "[" + std::to_string(i) + "]";
    const json& a = v[i];
    if (!a.is_object()) fail("\"" + actx + "\" must be an object");
    Atom atom{num(a, "x", actx), num(a, "mass", actx)};
    if (atom.mass < 0) fail("\"" + actx + ".mass\" must be nonnegative");
    out.push_back(atom);
  }
  return out;
}

InitialMeasure parse_measure(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail("\"" + ctx + "\" must be an object");
  InitialMeasure mu;
  if (j.contains("atoms")) mu.atoms = parse_atoms(j.at("atoms"), ctx + ".atoms");
  if (j.contains("density")) {
    const json& d = j.at("density");
    std::string dctx = ctx + ".density";
    std::string kind = text(d, "kind", dctx);
    MeasureDensity md;
    md.mass = num(d, "mass", dctx);
    if (md.mass < 0) fail("\"" + dctx + ".mass\" must be nonnegative");
    if (kind == "gaussian") {
      md.kind = MeasureDensity::Kind::Gaussian;
      md.a = num(d, "mean", dctx);
      md.b = num(d, "sd", dctx);
      if (md.b <= 0) fail("\"" + dctx + ".sd\" must be positive");
    } else if (kind == "uniform") {
      md.kind = MeasureDensity::Kind::Uniform;
      md.a = num(d, "left", dctx);
      md.b = num(d, "right", dctx);
      if (!(md.b > md.a)) fail("\"" + dctx + "\": right must exceed left");
    } else {
      fail("\"" + dctx + ".kind\" unknown: \"" + kind + "\"");
    }
    mu.density = md;
  }
  if (mu.total_mass() <= 0) fail("\"" + ctx + "\" must carry positive mass");
  return mu;
}

OffspringLaw parse_law(const json& j, const std::string& ctx,
                       const ScalarField& sigma) {
  if (!j.is_object()) fail("\"" + ctx + "\" must be an object");
  std::string kind = text(j, "kind", ctx);
  try {
    if (kind == "binary") return binary_law(num_or(j, "gamma", ctx, 1.0));
    if (kind == "three-point") return three_point_law(integer(j, "k", ctx), sigma);
    if (kind == "table") {
      const json& sup = need(j, "support", ctx);
      if (!sup.is_array()) fail("\"" + ctx + ".support\" must be an array");
      std::vector<int> support;
      for (const auto& e : sup) {
        if (!e.is_number_integer() || e.get<long>() < 0)
          fail("\"" + ctx + ".support\" must contain nonnegative integers");
        support.push_back(e.get<int>());
      }
      std::vector<double> probs =
          num_list(need(j, "probs", ctx), ctx + ".probs");
      return custom_table_law(std::move(support), std::move(probs),
                              num_or(j, "gamma", ctx, 1.0));
    }
  } catch (const std::invalid_argument& e) {
    fail("\"" + ctx + "\": " + e.what());
  }
  fail("\"" + ctx + ".kind\" unknown: \"" + kind + "\"");
}

RadonMeasureSpec parse_radon(const json& j, const std::string& ctx) {
  if (!j.is_object()) fail("\"" + ctx + "\" must be an object");
  RadonMeasureSpec eta;
  if (j.contains("atoms")) eta.atoms = parse_atoms(j.at("atoms"), ctx + ".atoms");
  if (j.contains("density"))
    eta.density = parse_field(j.at("density"), ctx + ".density");
  eta.b = num(j, "b", ctx);
  eta.l = num(j, "l", ctx);
  if (eta.b <= 0 || eta.l <= 0)
    fail("\"" + ctx + "\": b and l must be positive");
  return eta;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config root must be an object");

  ExperimentConfig cfg;

  const json& kj = need(j, "kernel", "");
  ScalarField h = parse_field(need(kj, "h", "kernel"), "kernel.h");
  ScalarField c = parse_field(need(kj, "c", "kernel"), "kernel.c");
  ScalarField sigma = parse_field(need(kj, "sigma", "kernel"), "kernel.sigma");
  try {
    cfg.model = make_model(h, c, sigma);
  } catch (const std::invalid_argument& e) {
    fail(std::string("\"kernel\": ") + e.what());
  }

  cfg.law = parse_law(need(j, "offspring", ""), "offspring", cfg.model.sigma);
  try {
    validate_law(cfg.law, cfg.model.sigma_sup);
  } catch (const std::invalid_argument& e) {
    fail(std::string("\"offspring\": ") + e.what());
  }

  cfg.mu = parse_measure(need(j, "initial", ""), "initial");

  if (j.contains("forward")) {
    const json& f = j.at("forward");
    cfg.forward.theta = num_or(f, "theta", "forward", cfg.forward.theta);
    cfg.forward.horizon = num_or(f, "horizon", "forward", cfg.forward.horizon);
    cfg.forward.dt_max = num_or(f, "dt_max", "forward", cfg.forward.dt_max);
    cfg.forward.replicates =
        integer_or(f, "replicates", "forward", cfg.forward.replicates);
    if (f.contains("snapshots"))
      cfg.forward.snapshots = num_list(f.at("snapshots"), "forward.snapshots");
    if (cfg.forward.theta <= 0) fail("\"forward.theta\" must be positive");
    if (cfg.forward.horizon < 0) fail("\"forward.horizon\" must be nonnegative");
    if (cfg.forward.dt_max <= 0) fail("\"forward.dt_max\" must be positive");
    if (cfg.forward.replicates < 1) fail("\"forward.replicates\" must be >= 1");
  }
  if (cfg.forward.snapshots.empty())
    cfg.forward.snapshots = {cfg.forward.horizon};

  if (j.contains("dual")) {
    const json& d = j.at("dual");
    DualSection ds;
    ds.m = static_cast<int>(integer_or(d, "m", "dual", 1));
    if (ds.m < 1) fail("\"dual.m\" must be >= 1");
    ds.f = parse_multi(need(d, "f", "dual"), "dual.f");
    ds.t = num_or(d, "t", "dual", cfg.forward.horizon);
    ds.replicates = integer_or(d, "replicates", "dual", ds.replicates);
    if (ds.t < 0) fail("\"dual.t\" must be nonnegative");
    if (ds.replicates < 1) fail("\"dual.replicates\" must be >= 1");
    cfg.dual = std::move(ds);
  }

  if (j.contains("phi"))
    cfg.phi = parse_field(j.at("phi"), "phi");

  if (j.contains("mass_check")) {
    const json& m = j.at("mass_check");
    MassCheckSection ms;
    if (m.contains("lambdas")) ms.lambdas = num_list(m.at("lambdas"), "mass_check.lambdas");
    if (m.contains("times")) ms.times = num_list(m.at("times"), "mass_check.times");
    ms.z_limit = num_or(m, "z_limit", "mass_check", ms.z_limit);
    if (ms.lambdas.empty()) fail("\"mass_check.lambdas\" must be nonempty");
    if (ms.times.empty()) fail("\"mass_check.times\" must be nonempty");
    for (double t : ms.times)
      if (t <= 0 || t > cfg.forward.horizon)
        fail("\"mass_check.times\" must lie in (0, forward.horizon]");
    cfg.mass_check = std::move(ms);
  }

  if (j.contains("rescale")) {
    const json& r = j.at("rescale");
    RescaleSection rs;
    if (r.contains("theta_scales"))
      rs.theta_scales = num_list(r.at("theta_scales"), "rescale.theta_scales");
    rs.t = num_or(r, "t", "rescale", rs.t);
    rs.z_limit = num_or(r, "z_limit", "rescale", rs.z_limit);
    if (r.contains("replicates")) {
      const json& reps = r.at("replicates");
      if (!reps.is_array()) fail("\"rescale.replicates\" must be an array");
      for (const auto& e : reps) {
        if (!e.is_number_integer() || e.get<long>() < 1)
          fail("\"rescale.replicates\" must contain positive integers");
        rs.replicates.push_back(e.get<long>());
      }
    }
    if (rs.theta_scales.empty()) fail("\"rescale.theta_scales\" must be nonempty");
    for (double s : rs.theta_scales)
      if (s < 1) fail("\"rescale.theta_scales\" entries must be >= 1");
    if (rs.replicates.empty()) rs.replicates = {200};
    if (rs.t <= 0) fail("\"rescale.t\" must be positive");
    cfg.rescale = std::move(rs);
  }

  if (j.contains("sbm")) {
    const json& s = j.at("sbm");
    SbmSection sb;
    sb.a_inf = num_or(s, "a_inf", "sbm", sb.a_inf);
    sb.sigma_inf = num_or(s, "sigma_inf", "sbm", sb.sigma_inf);
    if (sb.a_inf <= 0) fail("\"sbm.a_inf\" must be positive");
    if (sb.sigma_inf < 0) fail("\"sbm.sigma_inf\" must be nonnegative");
    cfg.sbm = sb;
  }

  if (j.contains("catalyst")) {
    const json& cj = j.at("catalyst");
    CatalystConfig cc;
    cc.eta = parse_radon(need(cj, "eta", "catalyst"), "catalyst.eta");
    const json& kl = need(cj, "k_list", "catalyst");
    if (!kl.is_array() || kl.empty())
      fail("\"catalyst.k_list\" must be a nonempty array");
    for (const auto& e : kl) {
      if (!e.is_number_integer() || e.get<long>() < 1)
        fail("\"catalyst.k_list\" must contain positive integers");
      cc.k_list.push_back(e.get<long>());
    }
    cc.h = h;
    cc.c = c;
    cc.c_floor = num_or(cj, "c_floor", "catalyst", cc.c_floor);
    cc.mu = cfg.mu;
    cc.theta = num_or(cj, "theta", "catalyst", cc.theta);
    cc.offspring_k = integer_or(cj, "offspring_k", "catalyst", cc.offspring_k);
    cc.f = cfg.dual ? cfg.dual->f : MultiFn{};
    if (cj.contains("f")) cc.f = parse_multi(cj.at("f"), "catalyst.f");
    cc.m = static_cast<int>(integer_or(cj, "m", "catalyst", cfg.dual ? cfg.dual->m : 1));
    cc.t = num_or(cj, "t", "catalyst", cc.t);
    cc.dt_max = num_or(cj, "dt_max", "catalyst", cfg.forward.dt_max);
    cc.forward_replicates =
        integer_or(cj, "forward_replicates", "catalyst", cc.forward_replicates);
    cc.dual_replicates =
        integer_or(cj, "dual_replicates", "catalyst", cc.dual_replicates);
    if (cc.m < 1) fail("\"catalyst.m\" must be >= 1");
    if (cc.theta <= 0) fail("\"catalyst.theta\" must be positive");
    if (cc.t <= 0) fail("\"catalyst.t\" must be positive");
    if (cc.dt_max <= 0) fail("\"catalyst.dt_max\" must be positive");
    if (cc.forward_replicates < 1 || cc.dual_replicates < 1)
      fail("\"catalyst\" replicate counts must be >= 1");
    cfg.catalyst = std::move(cc);
  }

  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0)
      fail("\"seed\" must be a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.width = static_cast<int>(integer_or(j, "width", "", 0));
  if (cfg.width < 0) fail("\"width\" must be >= 0");
  if (j.contains("out")) cfg.out_dir = text(j, "out", "");

  return cfg;
}

int resolve_width(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("SDSM_PARALLELISM")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return 1;
}

}  // namespace sdsm
