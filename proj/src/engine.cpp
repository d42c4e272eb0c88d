#include "gecko/engine.hpp"

#include <cmath>
#include <fstream>

#include "gecko/detail/format.hpp"
#include "gecko/errors.hpp"

namespace gecko {

namespace {

void check_config(const GeckoConfig& cfg) {
  if (!std::isfinite(cfg.step_size) || cfg.step_size <= 0.0)
    throw InputError("step size must be finite and positive");
  if (cfg.max_iters < 0) throw InputError("iteration budget must be >= 0");
  if (!std::isfinite(cfg.epsilon) || cfg.epsilon <= 0.0 || cfg.epsilon >= 1.0)
    throw InputError("epsilon must lie in (0, 1)");
  if (cfg.restore_every < 0)
    throw InputError("restore_every must be 0 (on violation) or positive");
  if (!std::isfinite(cfg.tol_rel) || cfg.tol_rel <= 0.0)
    throw InputError("kernel tolerance must be finite and positive");
  if (!std::isfinite(cfg.q_aim)) throw InputError("q_aim must be finite");
}

Eigen::VectorXd kernel_direction(const HamiltonianSpec& spec,
                                 const PulseParams& pulse,
                                 const GateTarget& target,
                                 const QualitySpec& quality,
                                 const KernelBasis& kernel,
                                 StepMode mode) {
  if (mode == StepMode::ProjectGradient)
    return project_gradient(kernel,
                            quality_gradient(spec, pulse, target, quality));
  return quality_direct_solve(spec, pulse, target, quality, kernel);
}

// Applies the update, halving the requested norm while the duration
// parameter would leave the feasible region.
StepResult step_with_backoff(const HamiltonianSpec& spec,
                             const PulseParams& pulse,
                             const GateTarget& target,
                             const KernelBasis& kernel,
                             const Eigen::VectorXd& dx, double norm) {
  constexpr int kMaxHalvings = 30;
  for (int attempt = 0;; ++attempt) {
    try {
      return take_step(spec, pulse, target, kernel, dx, norm);
    } catch (const StepRejectedError&) {
      if (attempt + 1 >= kMaxHalvings) throw;
      norm *= 0.5;
    }
  }
}

}  // namespace

std::string status_name(GeckoStatus status) {
  switch (status) {
    case GeckoStatus::Converged: return "converged";
    case GeckoStatus::BudgetExhausted: return "budget_exhausted";
    case GeckoStatus::Stationary: return "stationary";
  }
  throw InputError("unknown status");
}

GeckoTrace gecko_run(const HamiltonianSpec& spec, const PulseParams& pulse0,
                     const GateTarget& target, const QualitySpec& quality,
                     const GeckoConfig& cfg, const RestoreConfig& restorer) {
  check_config(cfg);
  validate_pulse(spec, pulse0);

  const double floor = 1.0 - cfg.epsilon;
  if (fidelity(spec, pulse0, target) <= floor)
    throw InputError(
        "the input pulse must already satisfy F > 1 - epsilon; solve for a "
        "high-fidelity pulse first");

  GeckoTrace trace;
  trace.pulse = pulse0;
  trace.status = GeckoStatus::BudgetExhausted;
  if (cfg.max_iters == 0) return trace;

  RestoreConfig restore_cfg = restorer;
  restore_cfg.epsilon = cfg.epsilon;

  const double q0 = quality_value(spec, pulse0, target, quality);
  if (q0 <= cfg.q_aim) {
    const auto kernel = kernel_basis(pulse_jacobian(spec, pulse0), cfg.tol_rel);
    trace.records.push_back({0, q0, fidelity(spec, pulse0, target),
                             kernel.dimension(), 0.0, false});
    trace.status = GeckoStatus::Converged;
    return trace;
  }

  PulseParams current = pulse0;
  for (int m = 1; m <= cfg.max_iters; ++m) {
    const auto kernel = kernel_basis(pulse_jacobian(spec, current), cfg.tol_rel);
    const Eigen::VectorXd dx =
        kernel_direction(spec, current, target, quality, kernel, cfg.mode);

    StepResult step;
    try {
      step = step_with_backoff(spec, current, target, kernel, dx,
                               cfg.step_size);
    } catch (const DegenerateStepError&) {
      trace.status = GeckoStatus::Stationary;
      break;
    } catch (const StepRejectedError&) {
      trace.status = GeckoStatus::Stationary;  // dt pinned at the boundary
      break;
    }

    const bool due = cfg.restore_every == 0
                         ? step.fidelity_after < floor
                         : (m % cfg.restore_every == 0 || m == cfg.max_iters);

    PulseParams next = step.pulse;
    bool restored = false;
    if (due && step.fidelity_after < floor) {
      try {
        next = restore(spec, next, target, restore_cfg);
        restored = true;
      } catch (const RestoreFailedError&) {
        // One halved retry from the pre-step pulse before giving up.
        step = step_with_backoff(spec, current, target, kernel, dx,
                                 0.5 * cfg.step_size);
        next = step.pulse;
        if (step.fidelity_after < floor) {
          next = restore(spec, next, target, restore_cfg);
          restored = true;
        }
      }
    }

    current = next;
    const double q = quality_value(spec, current, target, quality);
    trace.records.push_back({m, q, fidelity(spec, current, target),
                             kernel.dimension(), step.step_norm, restored});
    if (q <= cfg.q_aim) {
      trace.status = GeckoStatus::Converged;
      break;
    }
  }

  // Scheduled-policy breaks can leave the constraint violated; fold back
  // before returning so every exit satisfies it.
  if (fidelity(spec, current, target) <= floor) {
    current = restore(spec, current, target, restore_cfg);
    if (!trace.records.empty()) {
      TraceRecord& last = trace.records.back();
      last.fidelity = fidelity(spec, current, target);
      last.quality = quality_value(spec, current, target, quality);
      last.restored = true;
    }
  }
  trace.pulse = std::move(current);
  return trace;
}

GeckoTrace refine_and_smooth(const HamiltonianSpec& spec,
                             const PulseParams& pulse0,
                             const GateTarget& target, int rounds,
                             const GeckoConfig& cfg,
                             const RestoreConfig& restorer) {
  check_config(cfg);
  if (rounds < 0) throw InputError("rounds must be >= 0");
  validate_pulse(spec, pulse0);
  if (fidelity(spec, pulse0, target) <= 1.0 - cfg.epsilon)
    throw InputError(
        "the input pulse must already satisfy F > 1 - epsilon; solve for a "
        "high-fidelity pulse first");

  GeckoTrace trace;
  trace.pulse = pulse0;
  trace.status = GeckoStatus::Converged;
  const QualitySpec smooth = QualitySpec::smooth();
  int iter = 0;
  for (int round = 0; round < rounds; ++round) {
    const PulseParams refined = refine_pulse(trace.pulse, 2);
    GeckoTrace sub = gecko_run(spec, refined, target, smooth, cfg, restorer);
    for (TraceRecord record : sub.records) {
      record.iter = ++iter;
      trace.records.push_back(record);
    }
    trace.pulse = std::move(sub.pulse);
    trace.status = sub.status;
  }
  return trace;
}

void write_trace_csv(const std::string& path, const GeckoTrace& trace) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << "iter,Q,F,R,step_norm,restored\n";
  for (const TraceRecord& r : trace.records)
    out << r.iter << ',' << detail::fmt_real(r.quality) << ','
        << detail::fmt_real(r.fidelity) << ',' << r.kernel_dim << ','
        << detail::fmt_real(r.step_norm) << ',' << (r.restored ? 1 : 0)
        << '\n';
  if (!out) throw FormatError("failed writing '" + path + "'");
}

}  // namespace gecko
