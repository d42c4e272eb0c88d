#pragma once

#include <cstdint>
#include <string>

#include "gecko/errors.hpp"
#include "gecko/pulse_model.hpp"

namespace gecko {

/// Settings for the fidelity maximizer.
struct RestoreConfig {
  /// Target constraint: stop as soon as F > 1 - epsilon.
  double epsilon = 1e-7;
  int max_iters = 2000;
  /// First line-search trial step; later iterations warm-start from the
  /// previously accepted step.
  double initial_step = 1.0;
  /// Backtracking factor applied after each rejected trial.
  double shrink = 0.5;
  /// Armijo sufficient-increase constant.
  double armijo_c = 1e-4;
  /// Drives the one-shot random kick applied if the gradient vanishes while
  /// the constraint is still unmet.
  std::uint64_t seed = 0;
  /// Accelerate with Polak-Ribiere conjugate directions (restarted to
  /// steepest ascent whenever the direction stops being one). Plain
  /// steepest ascent when false.
  bool conjugate_directions = true;
};

/// Raised when the iteration budget runs out before F > 1 - epsilon; carries
/// the best pulse found so the caller can keep or retry it.
class RestoreFailedError : public Error {
 public:
  RestoreFailedError(const std::string& message, PulseParams best,
                     double best_fidelity)
      : Error(message), best_(std::move(best)), best_fidelity_(best_fidelity) {}

  const PulseParams& best_pulse() const { return best_; }
  double best_fidelity() const { return best_fidelity_; }

 private:
  PulseParams best_;
  double best_fidelity_;
};

/// Exact fidelity gradient over all free parameters (flattened convention of
/// tangent_kernel, dt last when optimize_dt). With tau = Tr{U_G^dag U_target}:
///   dF/dtheta_j = Re[conj(tau) Tr{(dU_G/dtheta_j)^dag U_target}] / (N |tau|).
/// At tau = 0 the fidelity is not differentiable and the zero subgradient is
/// returned.
Eigen::VectorXd fidelity_gradient(const HamiltonianSpec& spec,
                                  const PulseParams& pulse,
                                  const GateTarget& target);

/// Line-searched gradient ascent on the fidelity until F > 1 - epsilon.
/// Accepted iterates never decrease F; the first iterate satisfying the
/// constraint is returned (the input itself when it already satisfies it).
/// Exhausting max_iters raises RestoreFailedError with the best pulse.
PulseParams restore(const HamiltonianSpec& spec, const PulseParams& pulse,
                    const GateTarget& target, const RestoreConfig& cfg = {});

/// Deterministic random pulse: entries uniform in
/// [-amplitude_scale, amplitude_scale], generated counter-based so the same
/// seed always yields the same pulse on every platform.
PulseParams random_pulse(const HamiltonianSpec& spec, int segments, double dt,
                         double amplitude_scale, std::uint64_t seed);

}  // namespace gecko
