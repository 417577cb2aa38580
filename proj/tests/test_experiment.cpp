#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "wavecross/experiment.hpp"

using namespace wx;

namespace {

json minimal_check_cfg() {
  json j;
  j["schema_version"] = 1;
  j["study"] = "tiny";
  j["seed"] = 7;
  j["checks"] = json::array();
  json c;
  c["name"] = "fourier_intertwining";
  c["cases"] = 2;
  c["tol"] = 1e-6;
  j["checks"].push_back(c);
  return j;
}

json crossing_study_cfg() {
  json j;
  j["schema_version"] = 1;
  j["study"] = "mini_crossing";
  j["seed"] = 3;
  j["model"] = json{{"name", "schrodinger_crossing_1d"}};
  j["initial"] = json::object();
  j["time"] = json{{"t_end", 1.06}};
  j["eps"] = json::array({2e-2});
  return j;
}

bool message_mentions(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("minimal check-only config parses with defaults") {
  ExperimentConfig cfg = parse_config(minimal_check_cfg());
  CHECK(cfg.study == "tiny");
  CHECK(cfg.seed == 7);
  CHECK(cfg.model_name.empty());
  CHECK(cfg.eps.empty());
  REQUIRE(cfg.checks.size() == 1);
  CHECK(cfg.checks[0].name == "fourier_intertwining");
  CHECK(cfg.checks[0].params.contains("cases"));
  CHECK(!cfg.checks[0].params.contains("name"));
}

TEST_CASE("unknown keys are rejected by name") {
  json j = minimal_check_cfg();
  j["bogus"] = 1;
  try {
    parse_config(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_mentions(e, "bogus"));
  }

  json k = crossing_study_cfg();
  k["propagator"] = json{{"with_b1", true}, {"wth_b1", false}};
  try {
    parse_config(k);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_mentions(e, "wth_b1"));
  }

  json m = crossing_study_cfg();
  m["initial"] = json{{"bnd", 1}};
  try {
    parse_config(m);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_mentions(e, "bnd"));
  }
}

TEST_CASE("schema and value validation") {
  json j = minimal_check_cfg();
  j["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  json k = crossing_study_cfg();
  k["eps"] = json::array({1e-2, 2e-2});
  try {
    parse_config(k);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_mentions(e, "decreasing"));
  }

  json m = crossing_study_cfg();
  m["model"] = "no_such_model";
  CHECK_THROWS_AS(parse_config(m), ConfigError);

  json n = crossing_study_cfg();
  n["initial"] = json{{"z0", json::array({1.0, 2.0, 3.0})}};
  CHECK_THROWS_AS(parse_config(n), ConfigError);

  json p = crossing_study_cfg();
  p["time"] = json{{"t_end", 0.0}};
  CHECK_THROWS_AS(parse_config(p), ConfigError);
}

TEST_CASE("builtin registry") {
  auto names = builtin_model_names();
  CHECK(names.size() == 7);
  CHECK(std::find(names.begin(), names.end(), "gapped_adiabatic_1d") !=
        names.end());
  CHECK(std::find(names.begin(), names.end(), "pendulum_1d") != names.end());
  CHECK(builtin_is_scalar("pendulum_1d"));
  CHECK(builtin_is_scalar("harmonic_1d"));
  CHECK(builtin_is_scalar("free_1d"));
  CHECK(!builtin_is_scalar("gapped_adiabatic_1d"));
  CHECK(!builtin_is_scalar("bloch_linear_1d"));
  CHECK_THROWS_AS(builtin_two_level("pendulum_1d"), ConfigError);
  CHECK_THROWS_AS(builtin_scalar("gapped_adiabatic_1d"), ConfigError);
  VecR z0 = builtin_default_z0("schrodinger_crossing_1d");
  REQUIRE(z0.size() == 2);
  CHECK(z0[0] == 0.0);
  CHECK(z0[1] == 1.0);
}

TEST_CASE("inline two-level model round-trips through a config") {
  TwoLevelModel m = builtin_two_level("gapped_adiabatic_1d");
  json j;
  j["schema_version"] = 1;
  j["study"] = "inline_model";
  j["seed"] = 1;
  j["model"] = json{{"two_level", two_level_to_json(m)}};
  j["time"] = json{{"t_end", 0.5}};
  j["eps"] = json::array({1e-2});
  j["initial"] = json{{"z0", json::array({0.4, 0.6})}};
  ExperimentConfig cfg = parse_config(j);
  CHECK(cfg.model_name == "custom_two_level");
  VecR z(2);
  z << 0.37, 0.61;
  CHECK(cfg.two_level.band_h(1, 0.2, z) ==
        doctest::Approx(m.band_h(1, 0.2, z)).epsilon(1e-14));
  CHECK(cfg.two_level.band_h(2, 0.2, z) ==
        doctest::Approx(m.band_h(2, 0.2, z)).epsilon(1e-14));
}

TEST_CASE("check-only study is deterministic") {
  ExperimentConfig cfg = parse_config(minimal_check_cfg());
  StudyResult a = run_study(cfg);
  StudyResult b = run_study(cfg);
  CHECK(a.all_pass);
  CHECK(summary_json(a).dump() == summary_json(b).dump());

  RunOptions opt;
  opt.has_seed_override = true;
  opt.seed_override = 12345;
  StudyResult c = run_study(cfg, opt);
  CHECK(summary_json(c)["seed"].get<std::uint64_t>() == 12345);
  CHECK(summary_json(a)["seed"].get<std::uint64_t>() == 7);
}

TEST_CASE("unknown check parameters are rejected") {
  json j = minimal_check_cfg();
  j["checks"][0]["tolx"] = 1.0;
  ExperimentConfig cfg = parse_config(j);  // params are check-validated
  try {
    run_study(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_mentions(e, "tolx"));
  }
  json k = minimal_check_cfg();
  k["checks"][0]["name"] = "no_such_check";
  ExperimentConfig cfg2 = parse_config(k);
  CHECK_THROWS_AS(run_study(cfg2), ConfigError);
}

TEST_CASE("crossing study produces a sane table") {
  ExperimentConfig cfg = parse_config(crossing_study_cfg());
  StudyResult res = run_study(cfg);
  REQUIRE(res.runs.size() == 1);
  REQUIRE(!res.rows.empty());
  const StudyRow& last = res.rows.back();
  CHECK(last.eps == 2e-2);
  CHECK(last.t == doctest::Approx(1.06));
  CHECK(last.err_total < 0.5);
  CHECK(last.err_total > 0.0);
  CHECK(last.overlap_band2 > 0.9);
  REQUIRE(res.runs[0].sol.crossing.has_value());
  CHECK(res.runs[0].sol.crossing->alpha.size() == 1);
  CHECK(std::abs(res.runs[0].sol.crossing->alpha[0]) < 1e-9);

  json s = summary_json(res);
  CHECK(s["schema_version"] == 1);
  CHECK(s["study"] == "mini_crossing");
  CHECK(s.contains("rows"));
  CHECK(s.contains("diagnostics"));
  CHECK(s.contains("config"));
  CHECK(!s.dump().empty());
  CHECK(s.dump().find("wall") == std::string::npos);
}

TEST_CASE("csv header is stable") {
  std::vector<StudyRow> rows(1);
  rows[0].eps = 0.015625;
  rows[0].t = 0.5;
  rows[0].err_total = 0.25;
  rows[0].err_band1 = 0.1875;
  rows[0].err_band2 = 0.125;
  rows[0].overlap_band2 = 0.75;
  std::string csv = rows_csv(rows);
  CHECK(csv.rfind("eps,t,err_total,err_band1,err_band2,overlap_band2,"
                  "order_est\n",
                  0) == 0);
  // absent order estimate serializes as an empty field
  CHECK(csv.find("0.75,\n") != std::string::npos);
}

TEST_CASE("artifacts are written and parse back") {
  ExperimentConfig cfg = parse_config(minimal_check_cfg());
  StudyResult res = run_study(cfg);
  const std::string dir =
      (std::filesystem::temp_directory_path() / "wx_artifacts_test").string();
  std::filesystem::remove_all(dir);
  RunOptions opt;
  opt.out_dir = dir;
  write_artifacts(res, opt);
  std::ifstream in(dir + "/tiny_summary.json");
  REQUIRE(in.good());
  json back = json::parse(in);
  CHECK(back["study"] == "tiny");
  CHECK(std::filesystem::exists(dir + "/tiny_table.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("report merge validates and orders summaries") {
  ExperimentConfig cfg = parse_config(minimal_check_cfg());
  StudyResult res = run_study(cfg);
  json s1 = summary_json(res);
  json s2 = s1;
  s2["study"] = "aardvark";
  json merged = report_merge({s1, s2});
  REQUIRE(merged["studies"].size() == 2);
  CHECK(merged["studies"][0]["study"] == "aardvark");
  CHECK(merged["studies"][1]["study"] == "tiny");

  CHECK_THROWS_AS(report_merge({s1, s1}), ConfigError);
  json bad = s1;
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(report_merge({bad}), ConfigError);

  std::string text = report_text(merged);
  CHECK(text.find("aardvark") != std::string::npos);
  CHECK(text.find("PASS") != std::string::npos);
  std::string csv = report_csv(merged);
  CHECK(csv.find("study,") == 0);
}

TEST_CASE("scalar configs reject sample times") {
  json j;
  j["schema_version"] = 1;
  j["study"] = "hk_bad";
  j["seed"] = 1;
  j["model"] = json{{"name", "pendulum_1d"}};
  j["initial"] = json::object();
  j["time"] = json{{"t_end", 1.0}, {"sample_times", json::array({0.5})}};
  j["eps"] = json::array({1e-2});
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("check-only configs reject pipeline keys") {
  json j = minimal_check_cfg();
  j["eps"] = json::array({1e-2});
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

}  // TEST_SUITE
