#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sdsm/config.hpp"
#include "sdsm/experiments.hpp"
#include "sdsm/parallel.hpp"
#include "sdsm/report.hpp"

using namespace sdsm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kBaseConfig = R"({
  "kernel": {
    "h": {"kind": "zero"},
    "c": {"kind": "constant", "value": 1.0},
    "sigma": {"kind": "constant", "value": 1.0}
  },
  "offspring": {"kind": "binary", "gamma": 1.0},
  "initial": {"atoms": [{"x": 0.0, "mass": 1.0}]},
  "forward": {"theta": 30, "horizon": 0.1, "dt_max": 0.01, "replicates": 60},
  "dual": {"m": 2, "f": {"kind": "constant", "value": 1.0}, "t": 0.1,
           "replicates": 300},
  "seed": 17
})";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string mutated(const std::function<void(json&)>& f) {
  json j = json::parse(kBaseConfig);
  f(j);
  return j.dump();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

bool round_trips(double v) {
  std::string s = fmt_double(v);
  double back = std::strtod(s.c_str(), nullptr);
  return back == v && std::signbit(back) == std::signbit(v);
}

}  // namespace

TEST_CASE("config parsing fills sections and applies defaults") {
  ExperimentConfig cfg = parse_config(kBaseConfig);
  CHECK(std::holds_alternative<ZeroFn>(cfg.model.h));
  CHECK(cfg.model.rho0 == 0.0);
  CHECK(cfg.law.kind == OffspringLaw::Kind::Binary);
  CHECK(cfg.mu.atoms.size() == 1);
  CHECK(cfg.mu.total_mass() == 1.0);
  CHECK(cfg.forward.theta == 30.0);
  CHECK(cfg.forward.horizon == 0.1);
  CHECK(cfg.forward.dt_max == 0.01);
  CHECK(cfg.forward.replicates == 60);
  REQUIRE(cfg.forward.snapshots.size() == 1);
  CHECK(cfg.forward.snapshots[0] == 0.1);
  REQUIRE(cfg.dual.has_value());
  CHECK(cfg.dual->m == 2);
  CHECK(cfg.dual->f.kind == MultiFn::Kind::Constant);
  CHECK(cfg.dual->f.value == 1.0);
  CHECK(cfg.dual->t == 0.1);
  CHECK(cfg.dual->replicates == 300);
  CHECK(!cfg.mass_check);
  CHECK(!cfg.rescale);
  CHECK(!cfg.sbm);
  CHECK(!cfg.catalyst);
  CHECK(!cfg.phi);
  CHECK(cfg.seed == 17);
  CHECK(cfg.width == 0);
  CHECK(cfg.out_dir == ".");

  std::string full = mutated([](json& j) {
    j["forward"]["horizon"] = 0.5;
    j["phi"] = {{"kind", "gaussian"},
                {"amplitude", 1.0},
                {"center", 0.0},
                {"width", 1.0}};
    j["mass_check"] = json::object();
    j["rescale"] = json::object();
    j["sbm"] = json::object();
    j["catalyst"] = {
        {"eta", {{"atoms", json::array({{{"x", 0.2}, {"mass", 0.5}}})},
                 {"b", 1.0},
                 {"l", 1.0}}},
        {"k_list", json::array({2, 4})}};
    j["width"] = 3;
    j["out"] = "runs/demo";
  });
  ExperimentConfig c2 = parse_config(full);
  REQUIRE(c2.phi.has_value());
  CHECK(std::holds_alternative<GaussianFn>(*c2.phi));
  REQUIRE(c2.mass_check.has_value());
  CHECK(c2.mass_check->lambdas == std::vector<double>{-2, -1, -0.5});
  CHECK(c2.mass_check->times == std::vector<double>{0.25, 0.5});
  CHECK(c2.mass_check->z_limit == 3.0);
  REQUIRE(c2.rescale.has_value());
  CHECK(c2.rescale->theta_scales == std::vector<double>{1, 2, 4, 8});
  CHECK(c2.rescale->t == 0.25);
  CHECK(c2.rescale->replicates == std::vector<long>{200});
  CHECK(c2.rescale->z_limit == 4.0);
  REQUIRE(c2.sbm.has_value());
  CHECK(c2.sbm->a_inf == 1.0);
  CHECK(c2.sbm->sigma_inf == 1.0);
  REQUIRE(c2.catalyst.has_value());
  CHECK(c2.catalyst->k_list == std::vector<long>{2, 4});
  CHECK(c2.catalyst->eta.atoms.size() == 1);
  CHECK(c2.catalyst->c_floor == 0.1);
  CHECK(c2.catalyst->theta == 100.0);
  CHECK(c2.catalyst->offspring_k == 0);
  CHECK(c2.catalyst->m == 2);          // inherited from the dual section
  CHECK(c2.catalyst->t == 0.25);
  CHECK(c2.catalyst->dt_max == 0.01);  // inherited from forward.dt_max
  CHECK(c2.width == 3);
  CHECK(c2.out_dir == "runs/demo");
}

TEST_CASE("config validation names the offending key") {
  CHECK(config_error("{").find("config is not valid JSON") != std::string::npos);
  CHECK(config_error("[1,2]").find("config root must be an object") !=
        std::string::npos);
  CHECK(config_error("{}").find("missing key \".kernel\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) { j["kernel"].erase("h"); }))
            .find("missing key \"kernel.h\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["kernel"]["c"] = {{"kind", "wibble"}};
        })).find("\"kernel.c.kind\" unknown: \"wibble\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["kernel"]["sigma"] = {{"kind", "gaussian"},
                                  {"amplitude", 1.0},
                                  {"center", 0.0}};
        })).find("missing key \"kernel.sigma.width\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["kernel"]["h"] = {{"kind", "constant"}, {"value", 1.0}};
        })).find("\"kernel\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["kernel"]["sigma"] = {{"kind", "constant"}, {"value", 3.0}};
          j["offspring"] = {{"kind", "three-point"}, {"k", 4}};
        })).find("raise k to at least 13") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["initial"] = {{"atoms", json::array()}};
        })).find("\"initial\" must carry positive mass") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["initial"]["atoms"][0]["mass"] = -0.5;
        })).find("\"initial.atoms[0].mass\" must be nonnegative") !=
        std::string::npos);
  CHECK(config_error(mutated([](json& j) { j["forward"]["theta"] = 0; }))
            .find("\"forward.theta\" must be positive") != std::string::npos);
  CHECK(config_error(mutated([](json& j) { j["forward"]["replicates"] = 0; }))
            .find("\"forward.replicates\" must be >= 1") != std::string::npos);
  CHECK(config_error(mutated([](json& j) { j["dual"].erase("f"); }))
            .find("missing key \"dual.f\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["dual"]["f"] = {{"kind", "spline"}};
        })).find("\"dual.f.kind\" unknown: \"spline\"") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["mass_check"] = {{"times", json::array({0.05, 0.4})}};
        })).find("\"mass_check.times\" must lie in (0, forward.horizon]") !=
        std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["rescale"] = {{"theta_scales", json::array({0.5})}};
        })).find("\"rescale.theta_scales\" entries must be >= 1") !=
        std::string::npos);
  CHECK(config_error(mutated([](json& j) { j["seed"] = -1; }))
            .find("\"seed\" must be a nonnegative integer") != std::string::npos);
  CHECK(config_error(mutated([](json& j) { j["width"] = -2; }))
            .find("\"width\" must be >= 0") != std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["catalyst"] = {
              {"eta", {{"b", 0.0}, {"l", 1.0}}},
              {"k_list", json::array({2})}};
        })).find("\"catalyst.eta\": b and l must be positive") !=
        std::string::npos);
  CHECK(config_error(mutated([](json& j) {
          j["catalyst"] = {{"eta", {{"b", 1.0}, {"l", 1.0}}}};
        })).find("missing key \"catalyst.k_list\"") != std::string::npos);
}

TEST_CASE("parallelism width resolution honors explicit value then environment") {
  unsetenv("SDSM_PARALLELISM");
  CHECK(resolve_width(0) == 1);
  CHECK(resolve_width(3) == 3);
  setenv("SDSM_PARALLELISM", "6", 1);
  CHECK(resolve_width(0) == 6);
  CHECK(resolve_width(2) == 2);
  setenv("SDSM_PARALLELISM", "abc", 1);
  CHECK(resolve_width(0) == 1);
  setenv("SDSM_PARALLELISM", "0", 1);
  CHECK(resolve_width(0) == 1);
  setenv("SDSM_PARALLELISM", "3x", 1);
  CHECK(resolve_width(0) == 1);
  setenv("SDSM_PARALLELISM", "", 1);
  CHECK(resolve_width(0) == 1);
  unsetenv("SDSM_PARALLELISM");
}

TEST_CASE("csv cells round-trip doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, M_PI, 1e-300, 1e300,
                   4.9406564584124654e-324, 12345.678901234567, -2.5e-9, 1.0,
                   0.0, -0.0})
    CHECK(round_trips(v));
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_int(0) == "0");
  CHECK(fmt_int(-123) == "-123");
  CHECK(fmt_int(9223372036854775807LL) == "9223372036854775807");
}

TEST_CASE("table rendering and manifests") {
  Table t;
  t.name = "demo";
  t.columns = {"a", "b"};
  t.add_row({"1", "2"});
  CHECK_THROWS_AS(t.add_row({"only-one"}), std::logic_error);
  REQUIRE(t.rows.size() == 1);

  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  fs::path dir = fs::temp_directory_path() / "sdsm_harness_tables";
  fs::remove_all(dir);
  std::string path = write_csv(dir.string(), t);
  CHECK(slurp(path) == "a,b\n1,2\n");

  Manifest m;
  m.config_text = "{}";
  m.seed = 5;
  m.width = 3;
  m.entries.push_back({"demo.csv", 1, sha256_hex("a,b\n1,2\n")});
  write_manifest(dir.string(), m);
  json j = json::parse(slurp(dir / "manifest.json"));
  CHECK(j.at("config_sha256").get<std::string>() == sha256_hex("{}"));
  CHECK(j.at("config").get<std::string>() == "{}");
  CHECK(j.at("seed").get<std::uint64_t>() == 5);
  CHECK(j.at("width").get<int>() == 3);
  REQUIRE(j.at("files").size() == 1);
  CHECK(j.at("files")[0].at("file").get<std::string>() == "demo.csv");
  CHECK(j.at("files")[0].at("rows").get<long>() == 1);
  CHECK(j.at("files")[0].at("sha256").get<std::string>() ==
        sha256_hex(slurp(path)));
  fs::remove_all(dir);
}

TEST_CASE("rescaling divides positions and time and multiplies mass scale") {
  ParticleEnsemble e;
  e.theta = 50;
  e.positions = {1.0, -2.0, 3.5};
  e.time = 0.8;
  ParticleEnsemble out = rescale_transform(e, 2.0);
  REQUIRE(out.positions.size() == 3);
  CHECK(out.positions[0] == 0.5);
  CHECK(out.positions[1] == -1.0);
  CHECK(out.positions[2] == 1.75);
  CHECK(out.theta == 200.0);
  CHECK(out.time == 0.2);
  CHECK(out.mass() == e.mass() / 4.0);
  CHECK(e.positions[0] == 1.0);
}

TEST_CASE("replicate values land in replicate slots regardless of width") {
  auto body = [](long rep, RngStream& rng, double* out) {
    out[0] = static_cast<double>(rep);
    out[1] = rng.uniform();
    out[2] = rng.normal();
  };
  std::vector<double> w1 = parallel_replicates(7, 1, 33, 7, 3, body);
  std::vector<double> w5 = parallel_replicates(7, 5, 33, 7, 3, body);
  REQUIRE(w1.size() == 21);
  CHECK(w1 == w5);
  for (long rep = 0; rep < 7; ++rep)
    CHECK(w1[static_cast<size_t>(3 * rep)] == static_cast<double>(rep));
  RngStream direct(33, 2, 7);
  CHECK(w1[3 * 2 + 1] == direct.uniform());
  std::vector<double> other_tag = parallel_replicates(7, 1, 33, 9, 3, body);
  CHECK(other_tag[1] != w1[1]);
}

TEST_CASE("reports are byte-identical across widths") {
  ExperimentConfig cfg = parse_config(kBaseConfig);
  cfg.width = 1;
  Table t1 = duality_table(cfg);
  cfg.width = 8;
  Table t8 = duality_table(cfg);

  REQUIRE(t1.columns.size() == 11);
  REQUIRE(t1.rows.size() == 1);
  REQUIRE(t1.rows[0].size() == 11);
  CHECK(std::strtol(t1.rows[0][4].c_str(), nullptr, 10) == 60);
  CHECK(std::strtol(t1.rows[0][7].c_str(), nullptr, 10) == 300);
  CHECK(std::isfinite(std::strtod(t1.rows[0][8].c_str(), nullptr)));

  fs::path d1 = fs::temp_directory_path() / "sdsm_harness_w1";
  fs::path d8 = fs::temp_directory_path() / "sdsm_harness_w8";
  fs::remove_all(d1);
  fs::remove_all(d8);
  run_report(d1.string(), kBaseConfig, cfg.seed, 1, {t1});
  run_report(d8.string(), kBaseConfig, cfg.seed, 8, {t8});
  CHECK(slurp(d1 / "duality.csv") == slurp(d8 / "duality.csv"));

  json m1 = json::parse(slurp(d1 / "manifest.json"));
  json m8 = json::parse(slurp(d8 / "manifest.json"));
  CHECK(m1.at("width").get<int>() == 1);
  CHECK(m8.at("width").get<int>() == 8);
  CHECK(m1.at("config_sha256") == m8.at("config_sha256"));
  CHECK(m1.at("files") == m8.at("files"));
  CHECK(m1.at("files")[0].at("sha256").get<std::string>() ==
        sha256_hex(slurp(d1 / "duality.csv")));
  fs::remove_all(d1);
  fs::remove_all(d8);
}

TEST_CASE("forward report emits one row per snapshot statistic") {
  ExperimentConfig cfg = parse_config(mutated([](json& j) {
    j["forward"]["snapshots"] = json::array({0.05, 0.1});
    j["forward"]["replicates"] = 40;
  }));
  cfg.width = 1;
  Table t = forward_table(cfg);
  CHECK(t.columns == std::vector<std::string>{"experiment_id", "param",
                                              "estimate", "std_error", "n",
                                              "oracle", "z"});
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows[0][0] == "forward-mass");
  CHECK(t.rows[1][0] == "forward-mass2");
  CHECK(t.rows[2][0] == "forward-mass");
  CHECK(t.rows[4][0] == "forward-truncated");
  CHECK(std::strtod(t.rows[0][5].c_str(), nullptr) == 1.0);
  double z = std::strtod(t.rows[0][6].c_str(), nullptr);
  CHECK(std::abs(z) <= 5.0);
  double mass2_oracle = std::strtod(t.rows[1][5].c_str(), nullptr);
  CHECK(mass2_oracle == doctest::Approx(1.0 + 0.05).epsilon(1e-12));
  double trunc = std::strtod(t.rows[4][2].c_str(), nullptr);
  CHECK(trunc >= 0.0);
  CHECK(trunc <= 1.0);
}

TEST_CASE("error trend verdict tolerates noise-level wobble only") {
  // Clean decrease.
  CHECK(error_trend_ok({4.0, 2.0, 1.0}, {0.1, 0.1, 0.1}));
  // Converged tail: tiny increases within combined noise, clear net drop.
  CHECK(error_trend_ok({1.0, 0.10, 0.12, 0.13}, {0.05, 0.05, 0.05, 0.05}));
  // A single step up beyond the combined standard errors fails.
  CHECK(!error_trend_ok({1.0, 0.1, 0.5}, {0.05, 0.05, 0.05}));
  // Resolved initial error with no significant net improvement fails.
  CHECK(!error_trend_ok({1.0, 0.9, 0.95}, {0.1, 0.1, 0.1}));
  CHECK(!error_trend_ok({1.0, 1.0, 1.0}, {0.01, 0.01, 0.01}));
  // Initial error already at noise level: flat sequences are converged.
  CHECK(error_trend_ok({0.05, 0.06, 0.04}, {0.05, 0.05, 0.05}));
  // Degenerate lengths.
  CHECK(error_trend_ok({}, {}));
  CHECK(error_trend_ok({3.0}, {0.1}));
}
