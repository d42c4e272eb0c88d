#include "gecko/restorer.hpp"

#include <cmath>
#include <complex>
#include <cstdint>

#include "gecko/tangent_kernel.hpp"

namespace gecko {

namespace {

using Complex = std::complex<double>;

// Finalizer of the splitmix64 generator. Feeding it seed + counter * golden
// ratio gives an order-independent, platform-independent random stream.
std::uint64_t splitmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t z =
      splitmix64(seed + (counter + 1) * 0x9E3779B97F4A7C15ull);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// One-shot escape from a stationary point: a deterministic perturbation of
// the amplitudes (never dt) with norm 1e-3.
PulseParams kicked_pulse(const PulseParams& pulse, std::uint64_t seed) {
  Eigen::MatrixXd noise(pulse.phi.rows(), pulse.phi.cols());
  std::uint64_t counter = 0;
  for (Eigen::Index l = 0; l < noise.rows(); ++l)
    for (Eigen::Index k = 0; k < noise.cols(); ++k)
      noise(l, k) = 2.0 * uniform01(seed ^ 0x517CC1B727220A95ull, counter++) - 1.0;
  const double norm = noise.norm();
  PulseParams out = pulse;
  if (norm > 0.0) out.phi += (1e-3 / norm) * noise;
  return out;
}

}  // namespace

Eigen::VectorXd fidelity_gradient(const HamiltonianSpec& spec,
                                  const PulseParams& pulse,
                                  const GateTarget& target) {
  if (target.matrix.rows() != spec.dim())
    throw InputError("target dimension does not match the system");
  const PulseDerivatives derivatives = pulse_derivatives(spec, pulse);
  const Complex tau = (derivatives.unitary.adjoint() * target.matrix).trace();
  const double magnitude = std::abs(tau);
  Eigen::VectorXd grad =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(derivatives.columns.size()));
  if (magnitude == 0.0) return grad;  // subgradient at the non-smooth point

  const double scale = static_cast<double>(spec.dim()) * magnitude;
  for (std::size_t j = 0; j < derivatives.columns.size(); ++j) {
    const Complex dtau = (derivatives.columns[j].adjoint() * target.matrix).trace();
    grad(static_cast<Eigen::Index>(j)) = (std::conj(tau) * dtau).real() / scale;
  }
  return grad;
}

PulseParams restore(const HamiltonianSpec& spec, const PulseParams& pulse,
                    const GateTarget& target, const RestoreConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw InputError("epsilon must lie in (0, 1)");
  if (cfg.max_iters < 1) throw InputError("max_iters must be at least 1");
  validate_pulse(spec, pulse);

  PulseParams current = pulse;
  double f = fidelity(spec, current, target);
  if (f > 1.0 - cfg.epsilon) return current;

  PulseParams best = current;
  double best_f = f;
  bool kicked = false;

  Eigen::VectorXd grad = fidelity_gradient(spec, current, target);
  Eigen::VectorXd direction = grad;
  double step = cfg.initial_step;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double grad_norm = grad.norm();
    if (grad_norm < 1e-13) {
      if (kicked) break;
      current = kicked_pulse(current, cfg.seed);
      f = fidelity(spec, current, target);
      grad = fidelity_gradient(spec, current, target);
      direction = grad;
      kicked = true;
      continue;
    }

    double slope = direction.dot(grad);
    if (slope <= 0.0) {  // conjugate direction stopped ascending: restart
      direction = grad;
      slope = grad_norm * grad_norm;
    }

    // Backtracking Armijo line search along the ascent direction.
    double trial = step;
    bool accepted = false;
    PulseParams candidate;
    double f_candidate = 0.0;
    while (trial > 1e-18) {
      try {
        candidate = apply_parameter_delta(current, trial * direction);
        f_candidate = fidelity(spec, candidate, target);
        if (f_candidate >= f + cfg.armijo_c * trial * slope) {
          accepted = true;
          break;
        }
      } catch (const StepRejectedError&) {
        // dt would go nonpositive at this trial length; shrink and retry.
      }
      trial *= cfg.shrink;
    }
    if (!accepted) {
      if (kicked) break;
      current = kicked_pulse(current, cfg.seed);
      f = fidelity(spec, current, target);
      grad = fidelity_gradient(spec, current, target);
      direction = grad;
      kicked = true;
      continue;
    }

    current = std::move(candidate);
    f = f_candidate;
    if (f > best_f) {
      best = current;
      best_f = f;
    }
    if (f > 1.0 - cfg.epsilon) return current;

    const Eigen::VectorXd grad_new = fidelity_gradient(spec, current, target);
    if (cfg.conjugate_directions) {
      // Polak-Ribiere+ with automatic restart (beta clipped at zero).
      const double beta = std::max(
          0.0, grad_new.dot(grad_new - grad) / (grad_norm * grad_norm));
      direction = grad_new + beta * direction;
    } else {
      direction = grad_new;
    }
    grad = grad_new;
    // Warm start: reuse the accepted length, allowing it to grow back.
    step = std::min(trial * 2.0, 1e3);
  }

  throw RestoreFailedError(
      "fidelity restoration exhausted " + std::to_string(cfg.max_iters) +
          " iterations at F = " + std::to_string(best_f),
      best, best_f);
}

PulseParams random_pulse(const HamiltonianSpec& spec, int segments, double dt,
                         double amplitude_scale, std::uint64_t seed) {
  if (segments < 1) throw InputError("pulse needs at least one segment");
  if (!(amplitude_scale > 0.0))
    throw InputError("amplitude scale must be positive");
  PulseParams out;
  out.phi.resize(segments, spec.channels());
  std::uint64_t counter = 0;
  for (Eigen::Index l = 0; l < out.phi.rows(); ++l)
    for (Eigen::Index k = 0; k < out.phi.cols(); ++k)
      out.phi(l, k) = amplitude_scale * (2.0 * uniform01(seed, counter++) - 1.0);
  out.dt = dt;
  validate_pulse(spec, out);
  return out;
}

}  // namespace gecko
