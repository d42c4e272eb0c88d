#include "gecko/engine.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gecko/errors.hpp"

using namespace gecko;

namespace {

// Deterministically finds a high-fidelity pulse: restores the first random
// start (amplitude 3, fixed seed order) that reaches the threshold.
PulseParams solved_pulse(const HamiltonianSpec& spec, const GateTarget& target,
                         Eigen::Index segments, double epsilon) {
  RestoreConfig cfg;
  cfg.epsilon = epsilon;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    try {
      return restore(spec, random_pulse(spec, segments, 1.0, 3.0, seed),
                     target, cfg);
    } catch (const RestoreFailedError&) {
      continue;
    }
  }
  REQUIRE(false);
  return PulseParams{};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gecko_run validates its inputs") {
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  const auto pulse = solved_pulse(spec, target, 4, 1e-7);
  const QualitySpec smooth = QualitySpec::smooth();

  SUBCASE("bad configuration fields") {
    GeckoConfig cfg;
    cfg.step_size = 0.0;
    CHECK_THROWS_AS(gecko_run(spec, pulse, target, smooth, cfg), InputError);
    cfg = GeckoConfig{};
    cfg.max_iters = -1;
    CHECK_THROWS_AS(gecko_run(spec, pulse, target, smooth, cfg), InputError);
    cfg = GeckoConfig{};
    cfg.epsilon = 1.0;
    CHECK_THROWS_AS(gecko_run(spec, pulse, target, smooth, cfg), InputError);
    cfg = GeckoConfig{};
    cfg.restore_every = -2;
    CHECK_THROWS_AS(gecko_run(spec, pulse, target, smooth, cfg), InputError);
    cfg = GeckoConfig{};
    cfg.tol_rel = 0.0;
    CHECK_THROWS_AS(gecko_run(spec, pulse, target, smooth, cfg), InputError);
  }

  SUBCASE("a low-fidelity input is rejected") {
    PulseParams bad = pulse;
    bad.phi.array() += 0.3;
    CHECK_THROWS_AS(gecko_run(spec, bad, target, smooth, GeckoConfig{}),
                    InputError);
  }
}

TEST_CASE("gecko_run trivial exits") {
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  const auto pulse = solved_pulse(spec, target, 4, 1e-7);
  const QualitySpec smooth = QualitySpec::smooth();

  SUBCASE("a zero budget returns the pulse unchanged with an empty trace") {
    GeckoConfig cfg;
    cfg.max_iters = 0;
    const GeckoTrace trace = gecko_run(spec, pulse, target, smooth, cfg);
    CHECK(trace.records.empty());
    CHECK((trace.pulse.phi - pulse.phi).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("an already satisfied aim emits a single entry record") {
    GeckoConfig cfg;
    cfg.q_aim = q_smooth(pulse) + 1.0;
    const GeckoTrace trace = gecko_run(spec, pulse, target, smooth, cfg);
    CHECK(trace.status == GeckoStatus::Converged);
    REQUIRE(trace.records.size() == 1);
    CHECK(trace.records[0].iter == 0);
    CHECK(trace.records[0].quality == q_smooth(pulse));
    CHECK(trace.records[0].step_norm == 0.0);
    CHECK(trace.records[0].restored == false);
    CHECK(trace.records[0].kernel_dim > 0);
    CHECK((trace.pulse.phi - pulse.phi).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("a vanishing in-kernel gradient stops as stationary") {
    // The zero pulse is exactly stationary for the roughness objective; a
    // loose epsilon makes it a valid entry point.
    PulseParams zero;
    zero.phi = Eigen::MatrixXd::Zero(4, 1);
    zero.dt = 1.0;
    GeckoConfig cfg;
    cfg.epsilon = 0.1;
    cfg.q_aim = -1.0;  // unreachable, so the zero gradient must stop the loop
    const GeckoTrace trace = gecko_run(spec, zero, target, smooth, cfg);
    CHECK(trace.status == GeckoStatus::Stationary);
    CHECK(trace.records.empty());
    CHECK(trace.pulse.phi.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gecko_run smooths along the level set") {
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  // A loose constraint keeps these fast: steps of norm 0.02 stay inside it,
  // so the run is restore-free and descent is strict.
  const double eps = 1e-3;
  const auto base = solved_pulse(spec, target, 4, eps);
  const auto pulse = refine_pulse(base, 2);
  const QualitySpec smooth = QualitySpec::smooth();

  GeckoConfig cfg;
  cfg.step_size = 0.02;
  cfg.max_iters = 10;
  cfg.epsilon = eps;

  SUBCASE("project_gradient descends monotonically while restore-free") {
    const GeckoTrace trace = gecko_run(spec, pulse, target, smooth, cfg);
    REQUIRE(trace.records.size() == 10);
    double previous = q_smooth(pulse);
    for (const TraceRecord& r : trace.records) {
      if (!r.restored) {
        CHECK(r.quality < previous);
        CHECK(r.fidelity >= 1.0 - eps - 1e-12);
      }
      CHECK(r.step_norm > 0.0);
      CHECK(r.step_norm <= cfg.step_size);
      CHECK(r.kernel_dim > 0);
      previous = r.quality;
    }
    CHECK(trace.records.back().quality < q_smooth(pulse));
    CHECK(fidelity(spec, trace.pulse, target) > 1.0 - eps);
  }

  SUBCASE("direct_solve also reduces the objective") {
    cfg.mode = StepMode::DirectSolve;
    const GeckoTrace trace = gecko_run(spec, pulse, target, smooth, cfg);
    REQUIRE(!trace.records.empty());
    CHECK(trace.records.back().quality < q_smooth(pulse));
    CHECK(fidelity(spec, trace.pulse, target) > 1.0 - eps);
  }

  SUBCASE("identical inputs give bit-identical traces") {
    const GeckoTrace a = gecko_run(spec, pulse, target, smooth, cfg);
    const GeckoTrace b = gecko_run(spec, pulse, target, smooth, cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].quality == b.records[i].quality);
      CHECK(a.records[i].fidelity == b.records[i].fidelity);
      CHECK(a.records[i].step_norm == b.records[i].step_norm);
      CHECK(a.records[i].kernel_dim == b.records[i].kernel_dim);
      CHECK(a.records[i].restored == b.records[i].restored);
    }
    CHECK((a.pulse.phi - b.pulse.phi).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gecko_run scheduled restoration") {
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  const double eps = 1e-5;
  const auto pulse = solved_pulse(spec, target, 4, eps);
  const QualitySpec smooth = QualitySpec::smooth();

  GeckoConfig cfg;
  cfg.step_size = 0.3;  // large enough that every step violates the constraint
  cfg.max_iters = 7;
  cfg.epsilon = eps;
  cfg.restore_every = 3;

  const GeckoTrace trace = gecko_run(spec, pulse, target, smooth, cfg);
  REQUIRE(trace.records.size() == 7);

  SUBCASE("restores land exactly on the schedule and the final iteration") {
    for (const TraceRecord& r : trace.records) {
      const bool scheduled = r.iter % 3 == 0 || r.iter == 7;
      CHECK(r.restored == scheduled);
    }
  }

  SUBCASE("fidelity drifts between scheduled restores but ends restored") {
    bool drifted = false;
    for (const TraceRecord& r : trace.records)
      if (!r.restored) drifted = drifted || r.fidelity < 1.0 - eps;
    CHECK(drifted);
    CHECK(trace.records.back().fidelity > 1.0 - eps);
    CHECK(fidelity(spec, trace.pulse, target) > 1.0 - eps);
  }
}

TEST_CASE("gecko_run surfaces unrecoverable restoration") {
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  const auto pulse = solved_pulse(spec, target, 4, 1e-7);

  GeckoConfig cfg;
  cfg.step_size = 2.0;  // tanks the fidelity far beyond a one-step fix
  cfg.max_iters = 3;
  RestoreConfig weak;
  weak.max_iters = 1;
  CHECK_THROWS_AS(
      gecko_run(spec, pulse, target, QualitySpec::smooth(), cfg, weak),
      RestoreFailedError);
}

TEST_CASE("refine_and_smooth pipeline") {
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  const double eps = 1e-3;
  const auto base = solved_pulse(spec, target, 4, eps);

  GeckoConfig cfg;
  cfg.step_size = 0.02;
  cfg.max_iters = 15;
  cfg.epsilon = eps;

  SUBCASE("zero rounds is the identity") {
    const GeckoTrace trace = refine_and_smooth(spec, base, target, 0, cfg);
    CHECK(trace.records.empty());
    CHECK((trace.pulse.phi - base.phi).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("each round doubles the segment count and lowers the roughness") {
    const GeckoTrace trace = refine_and_smooth(spec, base, target, 2, cfg);
    CHECK(trace.pulse.segments() == 16);
    const PulseParams reference = refine_pulse(refine_pulse(base, 2), 2);
    CHECK(q_smooth(trace.pulse) < q_smooth(reference));
    CHECK(fidelity(spec, trace.pulse, target) > 1.0 - eps);
    int last = 0;
    for (const TraceRecord& r : trace.records) {
      CHECK(r.iter == last + 1);
      last = r.iter;
    }
  }

  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(refine_and_smooth(spec, base, target, -1, cfg),
                    InputError);
    PulseParams bad = base;
    bad.phi.array() += 0.5;
    CHECK_THROWS_AS(refine_and_smooth(spec, bad, target, 1, cfg), InputError);
  }
}

TEST_CASE("write_trace_csv") {
  GeckoTrace trace;
  trace.records.push_back({1, 0.5, 0.9999999, 3, 0.05, false});
  trace.records.push_back({2, 0.25, 0.99999995, 3, 0.05, true});

  SUBCASE("layout and determinism") {
    write_trace_csv("trace_a.csv", trace);
    write_trace_csv("trace_b.csv", trace);
    const std::string body = slurp("trace_a.csv");
    CHECK(body.rfind("iter,Q,F,R,step_norm,restored\n", 0) == 0);
    CHECK(body.find("1,0.5,0.99999990000000005,3,0.050000000000000003,0\n") !=
          std::string::npos);
    CHECK(body.find(",1\n") != std::string::npos);
    CHECK(body == slurp("trace_b.csv"));
    std::remove("trace_a.csv");
    std::remove("trace_b.csv");
  }

  SUBCASE("unwritable paths are reported") {
    CHECK_THROWS_AS(write_trace_csv("/nonexistent/dir/t.csv", trace),
                    FormatError);
  }
}

TEST_CASE("status_name tags") {
  CHECK(status_name(GeckoStatus::Converged) == "converged");
  CHECK(status_name(GeckoStatus::BudgetExhausted) == "budget_exhausted");
  CHECK(status_name(GeckoStatus::Stationary) == "stationary");
}
