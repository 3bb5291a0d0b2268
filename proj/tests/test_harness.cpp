#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "wallflip/harness.hpp"

namespace wallflip {
namespace {

namespace fs = std::filesystem;

bool mentions(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

ExperimentPlan tiny_bracket_plan() {
  ExperimentPlan p;
  p.experiment = "unit";
  p.seed = 77;
  p.bracket.eps = {0.2, 0.1};
  p.bracket.replicas = 6;
  p.bracket.t_scaled = 1.0;
  p.bracket.residual_eps = {0.2};
  p.bracket.residual_runs = 6;
  return p;
}

TEST_CASE("plan json round trip is lossless") {
  ExperimentPlan p;
  p.seed = 424242;
  p.lattice_l = 120;
  p.suites = {"bracket", "walk"};
  p.bracket.eps = {0.5, 0.25, 0.125};
  p.thresholds.she_ks = 0.07;
  p.walk.phi = TestFunctionSpec{"bump", {1.0, 0.75}};
  const nlohmann::json j = p.to_json();
  const ExperimentPlan q = ExperimentPlan::from_json(j);
  CHECK(q.to_json().dump() == j.dump());
  CHECK(q.seed == p.seed);
  CHECK(q.bracket.eps == p.bracket.eps);
  CHECK(q.walk.phi.family == "bump");
  CHECK(q.thresholds.she_ks == 0.07);
}

TEST_CASE("unknown keys are rejected at every level") {
  const ExperimentPlan base;
  nlohmann::json j = base.to_json();
  j["nope"] = 1;
  CHECK_THROWS_AS(ExperimentPlan::from_json(j), ConfigError);

  j = base.to_json();
  j["walk"]["nope"] = 1;
  try {
    ExperimentPlan::from_json(j);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "plan.walk"));
    CHECK(mentions(e, "nope"));
  }

  j = base.to_json();
  j["thresholds"]["typo_ks"] = 0.5;
  CHECK_THROWS_AS(ExperimentPlan::from_json(j), ConfigError);

  j = base.to_json();
  j["phi"]["shape"] = "round";
  CHECK_THROWS_AS(ExperimentPlan::from_json(j), ConfigError);
}

TEST_CASE("schema version and value types are enforced") {
  const ExperimentPlan base;
  nlohmann::json j = base.to_json();
  j["schema_version"] = 2;
  try {
    ExperimentPlan::from_json(j);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "schema_version"));
  }

  j = base.to_json();
  j["seed"] = "not a number";
  CHECK_THROWS_AS(ExperimentPlan::from_json(j), ConfigError);

  j = base.to_json();
  j["bracket"]["replicas"] = "many";
  CHECK_THROWS_AS(ExperimentPlan::from_json(j), ConfigError);

  CHECK_THROWS_AS(ExperimentPlan::from_json(nlohmann::json::array()),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentPlan::from_file("/nonexistent/plan.json"),
                  ConfigError);
}

TEST_CASE("plan hash is deterministic and input sensitive") {
  ExperimentPlan p;
  const std::string h = p.hash();
  CHECK(h.size() == 16);
  CHECK(h == ExperimentPlan().hash());
  ExperimentPlan q;
  q.seed += 1;
  CHECK(q.hash() != h);
  ExperimentPlan r;
  r.thresholds.invariance_ks *= 2.0;
  CHECK(r.hash() != h);
}

TEST_CASE("validation rejects out-of-contract plans") {
  ExperimentPlan p;
  p.bracket.replicas = 1;
  try {
    p.validate();
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "replicas"));
  }

  p = ExperimentPlan();
  p.stationarity.sites = {0};
  CHECK_THROWS_AS(p.validate(), ConfigError);

  p = ExperimentPlan();
  p.walk.moment_lengths = {100, 100};
  CHECK_THROWS_AS(p.validate(), ConfigError);

  p = ExperimentPlan();
  p.walk.coupling_length = 9;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  p = ExperimentPlan();
  p.s0 = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  p = ExperimentPlan();
  p.out_dir.clear();
  CHECK_THROWS_AS(p.validate(), ConfigError);

  p = ExperimentPlan();
  p.suites = {"bogus"};
  CHECK_THROWS_AS(p.validate(), ConfigError);

  p = ExperimentPlan();
  p.bracket.eps = {0.1, 0.2};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("window discipline separates tight and violating geometries") {
  CHECK_NOTHROW(check_window(0.1, 70, 5.0, 1.0, -1.0));
  try {
    check_window(0.1, 69, 5.0, 1.0, -1.0);
    FAIL("expected a window violation");
  } catch (const WindowViolation& e) {
    CHECK(mentions(e, "window"));
    CHECK(mentions(e, "L = 69"));
  }
  CHECK_NOTHROW(check_window(0.1, 55, 5.0, 9.9, 0.5));
  CHECK_THROWS_AS(check_window(0.1, 54, 5.0, 9.9, 0.5), WindowViolation);
  CHECK_NOTHROW(check_window(0.5, 10, 5.0, 0.0, -1.0));

  ExperimentPlan p;
  p.lattice_l = 10;
  p.stationarity.sites = {2, 5};
  CHECK_THROWS_AS(p.validate(), WindowViolation);
}

TEST_CASE("test function specs build strictly") {
  CHECK_NOTHROW((TestFunctionSpec{"bump", {1.0, 1.0}}.build()));
  CHECK_NOTHROW((TestFunctionSpec{"plateau", {0.0, 1.0, 1.0, 2.0}}.build()));
  CHECK_THROWS_AS((TestFunctionSpec{"nope", {1.0}}.build()), ConfigError);
  CHECK_THROWS_AS((TestFunctionSpec{"bump", {1.0}}.build()), ConfigError);
  CHECK_THROWS_AS((TestFunctionSpec{"bump", {0.5, 1.0}}.build()), ConfigError);
  CHECK_THROWS_AS((TestFunctionSpec{"bump", {1.0, 0.0}}.build()), ConfigError);
  CHECK_THROWS_AS((TestFunctionSpec{"plateau", {1.0, 1.0, 2.0, 3.0}}.build()),
                  ConfigError);
  CHECK_THROWS_AS((TestFunctionSpec{"plateau", {0.0, 1.0}}.build()),
                  ConfigError);
}

TEST_CASE("replica streams are disjoint across the id layout") {
  CHECK(replica_stream(2, 0, 5) == ((2ull << 56) | 5ull));
  CHECK(replica_stream(0, 1, 0) == (1ull << 32));
  CHECK(replica_stream(1, 0, 0) != replica_stream(0, 1, 0));
  CHECK(replica_stream(3, 2, 9) != replica_stream(3, 2, 10));
  CHECK(replica_stream(3, 2, 9) != replica_stream(3, 3, 9));
}

TEST_CASE("parallel map keeps index order and propagates failures") {
  const std::vector<int> got =
      parallel_map<int>(37, 5, [](int i) { return i * i; });
  REQUIRE(got.size() == 37);
  for (int i = 0; i < 37; ++i) CHECK(got[i] == i * i);

  const std::vector<int> serial =
      parallel_map<int>(24, 1, [](int i) { return 3 * i + 1; });
  const std::vector<int> threaded =
      parallel_map<int>(24, 4, [](int i) { return 3 * i + 1; });
  CHECK(serial == threaded);

  CHECK(parallel_map<int>(0, 4, [](int i) { return i; }).empty());
  CHECK_THROWS_AS(parallel_map<int>(20, 4,
                                    [](int i) -> int {
                                      if (i == 17) {
                                        throw std::runtime_error("boom");
                                      }
                                      return i;
                                    }),
                  std::runtime_error);
}

TEST_CASE("exactness criteria are parallelism independent end to end") {
  const std::vector<int> ids = {1, 7};
  ExperimentPlan serial = tiny_bracket_plan();
  serial.parallelism = 1;
  ExperimentPlan threaded = tiny_bracket_plan();
  threaded.parallelism = 4;
  const StatReport a = run_criteria(serial, ids);
  const StatReport b = run_criteria(threaded, ids);

  REQUIRE(a.criteria.size() == 2);
  CHECK(a.all_pass());
  CHECK(b.all_pass());
  CHECK(a.to_json()["criteria"].dump() == b.to_json()["criteria"].dump());
  REQUIRE(a.observable_rows.size() == b.observable_rows.size());
  CHECK(a.observable_rows.size() ==
        tiny_bracket_plan().bracket.eps.size() *
            static_cast<std::size_t>(tiny_bracket_plan().bracket.replicas));
  for (std::size_t i = 0; i < a.observable_rows.size(); ++i) {
    CHECK(a.observable_rows[i].w == b.observable_rows[i].w);
    CHECK(a.observable_rows[i].residual == b.observable_rows[i].residual);
  }
  CHECK(a.seed == 77);
  CHECK(a.criteria[0].id == 1);
  CHECK(a.criteria[1].id == 7);
}

TEST_CASE("duplicate and out-of-range criterion ids are handled") {
  ExperimentPlan p = tiny_bracket_plan();
  p.parallelism = 1;
  const std::vector<int> dup = {7, 7, 1, 1};
  const StatReport rep = run_criteria(p, dup);
  REQUIRE(rep.criteria.size() == 2);
  CHECK(rep.criteria[0].id == 1);
  CHECK(rep.criteria[1].id == 7);
  const std::vector<int> bad = {15};
  CHECK_THROWS_AS(run_criteria(p, bad), ConfigError);
  const std::vector<int> zero = {0};
  CHECK_THROWS_AS(run_criteria(p, zero), ConfigError);
}

TEST_CASE("empty criterion set reports vacuous success") {
  ExperimentPlan p = tiny_bracket_plan();
  const StatReport rep = run_criteria(p, {});
  CHECK(rep.criteria.empty());
  CHECK(rep.all_pass());
  const nlohmann::json j = rep.to_json();
  CHECK(j["all_gating_pass"] == true);
  CHECK(j["plan_hash"] == p.hash());
  CHECK(j["seed"] == 77);
}

TEST_CASE("unknown suite names are rejected") {
  ExperimentPlan p = tiny_bracket_plan();
  const std::vector<std::string> bogus = {"bogus"};
  CHECK_THROWS_AS(run_suites(p, bogus), ConfigError);
}

TEST_CASE("report files land under the plan output directory") {
  ExperimentPlan p = tiny_bracket_plan();
  p.parallelism = 2;
  const fs::path base =
      fs::temp_directory_path() / "wallflip_harness_test_out";
  fs::remove_all(base);
  p.out_dir = base.string();
  const std::vector<int> ids = {1, 7};
  const StatReport rep = run_criteria(p, ids);
  write_report_files(rep, p);

  REQUIRE(fs::exists(base / "report.json"));
  REQUIRE(fs::exists(base / "criteria.csv"));
  REQUIRE(fs::exists(base / "observables.csv"));

  std::ifstream in(base / "report.json");
  nlohmann::json j;
  in >> j;
  CHECK(j["schema_version"] == 1);
  CHECK(j["criteria"].size() == 2);
  CHECK(j["observable_row_count"] == rep.observable_rows.size());

  std::ifstream csv(base / "criteria.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 1 + rep.criteria.size());
  fs::remove_all(base);
}

TEST_CASE("criterion lines carry the verdict tag") {
  CriterionResult c;
  c.id = 3;
  c.name = "corner-density-half";
  c.pass = true;
  c.statistic = 0.001;
  c.threshold = 0.02;
  const std::string pass_line = format_criterion_line(c);
  CHECK(pass_line.find("[PASS]") == 0);
  CHECK(pass_line.find("corner-density-half") != std::string::npos);
  CHECK(pass_line.find("note:") == std::string::npos);

  c.pass = false;
  c.note = "documented shortfall";
  const std::string fail_line = format_criterion_line(c);
  CHECK(fail_line.find("[FAIL]") == 0);
  CHECK(fail_line.find("\n       note: documented shortfall") !=
        std::string::npos);

  c.gating = false;
  CHECK(format_criterion_line(c).find("[WARN]") == 0);
}

}  // namespace
}  // namespace wallflip
