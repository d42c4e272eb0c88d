#pragma once

#include <string>
#include <vector>

#include "gecko/pulse_model.hpp"
#include "gecko/quality.hpp"
#include "gecko/restorer.hpp"
#include "gecko/tangent_kernel.hpp"

namespace gecko {

/// How the in-kernel direction is chosen each iteration.
enum class StepMode {
  ProjectGradient,  // dx = -Z^T grad Q
  DirectSolve,      // dx = argmin_x Q(pulse + Z x)
};

/// Driver settings for the level-set optimization loop.
struct GeckoConfig {
  double step_size = 0.1;  // norm s of every applied parameter update
  int max_iters = 100;     // iteration budget n_S
  double q_aim = 0.0;      // stop once Q <= q_aim
  double epsilon = 1e-7;   // fidelity constraint F > 1 - epsilon
  // 0 restores whenever a step violates the constraint; a positive value k
  // restores only at iterations m with m % k == 0 (and at the last one).
  int restore_every = 0;
  double tol_rel = 1e-10;  // kernel singular-value threshold
  StepMode mode = StepMode::ProjectGradient;
};

/// Why the loop stopped.
enum class GeckoStatus {
  Converged,        // reached q_aim
  BudgetExhausted,  // ran all max_iters iterations
  Stationary,       // the in-kernel direction vanished
};

/// Lowercase tag for metadata and logs.
std::string status_name(GeckoStatus status);

/// One completed iteration: objective, fidelity, kernel dimension, the norm
/// of the applied update, and whether fidelity restoration acted.
struct TraceRecord {
  int iter = 0;
  double quality = 0.0;
  double fidelity = 0.0;
  Eigen::Index kernel_dim = 0;
  double step_norm = 0.0;
  bool restored = false;
};

/// Full optimization history plus the final pulse.
struct GeckoTrace {
  std::vector<TraceRecord> records;
  PulseParams pulse;
  GeckoStatus status = GeckoStatus::BudgetExhausted;
};

/// Runs the level-set loop: Jacobian -> kernel basis -> in-kernel step of
/// norm step_size -> fidelity restoration per the restore_every policy,
/// until Q <= q_aim or the budget is spent. The input must already satisfy
/// F > 1 - epsilon; so does the returned pulse. The restorer's epsilon is
/// overridden by cfg.epsilon so both stages enforce the same constraint.
GeckoTrace gecko_run(const HamiltonianSpec& spec, const PulseParams& pulse,
                     const GateTarget& target, const QualitySpec& quality,
                     const GeckoConfig& cfg,
                     const RestoreConfig& restorer = RestoreConfig{});

/// Doubles the segment count and smooths `rounds` times: each round runs
/// refine_pulse(*, 2) followed by gecko_run with the roughness objective.
/// Iteration numbers in the combined trace are sequential across rounds.
GeckoTrace refine_and_smooth(const HamiltonianSpec& spec,
                             const PulseParams& pulse,
                             const GateTarget& target, int rounds,
                             const GeckoConfig& cfg,
                             const RestoreConfig& restorer = RestoreConfig{});

/// Trace CSV with header iter,Q,F,R,step_norm,restored (restored as 0/1).
void write_trace_csv(const std::string& path, const GeckoTrace& trace);

}  // namespace gecko
