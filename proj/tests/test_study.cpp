#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "gecko/errors.hpp"
#include "gecko/pulse_model.hpp"
#include "gecko/quality.hpp"
#include "gecko/study.hpp"

using namespace gecko;

namespace {

StudyConfig toy_config() {
  StudyConfig cfg;
  cfg.seeds = 2;
  cfg.first_seed = 1;
  cfg.segments = 4;
  cfg.dt = 1.0;
  cfg.rounds = 1;
  cfg.amplitude = 3.0;
  cfg.sigmas = {1.0};
  cfg.pad = 4;
  cfg.gecko.epsilon = 1e-3;
  cfg.gecko.step_size = 0.02;
  cfg.gecko.max_iters = 5;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("run_smoothing_study rejects invalid configurations") {
  const HamiltonianSpec spec = model_preset("tfim1_h2zero");
  const GateTarget target = gate_target("CZ");
  StudyConfig cfg = toy_config();

  cfg.seeds = 0;
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
  cfg = toy_config();
  cfg.segments = 0;
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
  cfg = toy_config();
  cfg.dt = 0.0;
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
  cfg = toy_config();
  cfg.rounds = -1;
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
  cfg = toy_config();
  cfg.amplitude = -1.0;
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
  cfg = toy_config();
  cfg.sigmas = {2.0, 0.0};
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
  cfg = toy_config();
  cfg.pad = -1;
  CHECK_THROWS_AS(run_smoothing_study(spec, target, cfg), InputError);
}

TEST_CASE("run_smoothing_study aggregates per-mode quartiles") {
  const HamiltonianSpec spec = model_preset("tfim1_h2zero");
  const GateTarget target = gate_target("CZ");
  const StudyConfig cfg = toy_config();

  const StudyResult result = run_smoothing_study(spec, target, cfg);
  REQUIRE(result.requested == 2);
  REQUIRE(result.succeeded >= 1);
  CHECK(static_cast<int>(result.failures.size()) ==
        result.requested - result.succeeded);

  // Two methods (gecko, gauss_sigma1), one channel, 8 fine modes.
  const int fine_modes = 8;
  REQUIRE(static_cast<int>(result.rows.size()) == 2 * fine_modes);
  for (int n = 0; n < fine_modes; ++n) {
    const StudyRow& row = result.rows[static_cast<std::size_t>(n)];
    CHECK(row.method == "gecko");
    CHECK(row.channel == 0);
    CHECK(row.mode == n + 1);
    CHECK(row.freq == doctest::Approx(dst1_frequency(n + 1, 8, 0.5)));
  }
  CHECK(result.rows[8].method == "gauss_sigma1");
  CHECK(result.rows.back().mode == fine_modes);

  for (const StudyRow& row : result.rows) {
    CHECK(row.power_p25 >= 0.0);
    CHECK(row.power_p25 <= row.power_median);
    CHECK(row.power_median <= row.power_p75);
    // Linear interpolation between order statistics keeps the quartiles of
    // a two-sample set symmetric about the median.
    if (result.succeeded == 2)
      CHECK(row.power_p25 + row.power_p75 ==
            doctest::Approx(2.0 * row.power_median).epsilon(1e-12));
  }

  const StudyResult again = run_smoothing_study(spec, target, cfg);
  REQUIRE(again.rows.size() == result.rows.size());
  CHECK(again.succeeded == result.succeeded);
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    CHECK(again.rows[i].power_p25 == result.rows[i].power_p25);
    CHECK(again.rows[i].power_median == result.rows[i].power_median);
    CHECK(again.rows[i].power_p75 == result.rows[i].power_p75);
  }
}

TEST_CASE("run_smoothing_study collapses quartiles for a single seed") {
  const HamiltonianSpec spec = model_preset("tfim1_h2zero");
  const GateTarget target = gate_target("CZ");
  StudyConfig cfg = toy_config();
  cfg.seeds = 1;
  cfg.sigmas = {};

  const StudyResult result = run_smoothing_study(spec, target, cfg);
  REQUIRE(result.succeeded == 1);
  REQUIRE(result.rows.size() == 8);
  for (const StudyRow& row : result.rows) {
    CHECK(row.method == "gecko");
    CHECK(row.power_p25 == row.power_median);
    CHECK(row.power_p75 == row.power_median);
  }
}

TEST_CASE("run_smoothing_study reports seeds that cannot be solved") {
  const HamiltonianSpec spec = model_preset("tfim1_h2zero");
  const GateTarget target = gate_target("CZ");
  StudyConfig cfg = toy_config();
  cfg.restorer.max_iters = 1;  // far too few to reach the constraint

  const StudyResult result = run_smoothing_study(spec, target, cfg);
  CHECK(result.requested == 2);
  CHECK(result.succeeded == 0);
  CHECK(result.rows.empty());
  REQUIRE(result.failures.size() == 2);
  CHECK(result.failures[0].find("seed 1 skipped:") != std::string::npos);
  CHECK(result.failures[1].find("seed 2 skipped:") != std::string::npos);
}

TEST_CASE("write_study_csv emits the pinned schema") {
  StudyResult result;
  StudyRow row;
  row.method = "gecko";
  row.channel = 0;
  row.mode = 1;
  row.freq = 0.05;
  row.power_p25 = 0.5;
  row.power_median = 1.0;
  row.power_p75 = 2.0;
  result.rows.push_back(row);
  row.method = "gauss_sigma2";
  row.mode = 2;
  row.freq = 0.1;
  result.rows.push_back(row);

  const std::string path = "study_test.csv";
  write_study_csv(path, result);
  const std::string body = slurp(path);
  CHECK(body ==
        "method,channel,mode_n,freq_per_time,power_p25,power_median,"
        "power_p75\n"
        "gecko,0,1,0.050000000000000003,0.5,1,2\n"
        "gauss_sigma2,0,2,0.10000000000000001,0.5,1,2\n");

  write_study_csv(path, result);
  CHECK(slurp(path) == body);
  std::remove(path.c_str());

  CHECK_THROWS_AS(write_study_csv("/nonexistent/dir/out.csv", result),
                  FormatError);
}
