#include "gecko/quality.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include "gecko/detail/format.hpp"
#include "gecko/errors.hpp"
#include "gecko/restorer.hpp"

namespace gecko {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Symmetric sine matrix S[n][l] = sin(pi (n+1)(l+1) / (L+1)); S^2 = (L+1)/2 I.
const Eigen::MatrixXd& sine_matrix(Eigen::Index length) {
  static std::mutex mutex;
  static std::map<Eigen::Index, Eigen::MatrixXd> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(length);
  if (it != cache.end()) return it->second;
  Eigen::MatrixXd s(length, length);
  const double scale = kPi / static_cast<double>(length + 1);
  for (Eigen::Index n = 0; n < length; ++n)
    for (Eigen::Index l = 0; l < length; ++l)
      s(n, l) = std::sin(scale * static_cast<double>((n + 1) * (l + 1)));
  return cache.emplace(length, std::move(s)).first->second;
}

void check_weights(const Eigen::VectorXd& weights) {
  if (weights.size() < 1) throw InputError("filter weights must be non-empty");
  for (Eigen::Index n = 0; n < weights.size(); ++n) {
    const double w = weights[n];
    if (!std::isfinite(w) || w < 0.0 || w > 1.0)
      throw InputError("filter weights must lie in [0, 1]");
  }
}

// Zero-padded full-parameter gradient from a per-(segment,channel) matrix.
Eigen::VectorXd flatten_gradient(const PulseParams& pulse,
                                 const Eigen::MatrixXd& per_segment,
                                 double dt_component = 0.0) {
  const Eigen::Index length = pulse.segments();
  const Eigen::Index channels = pulse.channels();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(parameter_count(pulse));
  for (Eigen::Index l = 0; l < length; ++l)
    for (Eigen::Index k = 0; k < channels; ++k)
      grad[l * channels + k] = per_segment(l, k);
  if (pulse.optimize_dt) grad[grad.size() - 1] = dt_component;
  return grad;
}

double drift_norm_squared(const HamiltonianSpec& spec) {
  double total = 0.0;
  for (const auto& term : spec.drift()) total += term.strength * term.strength;
  return total;
}

// Grid point with the lowest fidelity (first hit wins ties; the first listed
// channel's offset varies slowest).
struct GridMinimum {
  double fidelity = 0.0;
  PulseParams pulse;
};

GridMinimum robust_grid_minimum(const HamiltonianSpec& spec,
                                const PulseParams& pulse,
                                const GateTarget& target,
                                const RobustSpec& robust) {
  validate_pulse(spec, pulse);
  if (robust.channels.empty())
    throw InputError("robustness objective needs at least one channel");
  for (int c : robust.channels)
    if (c < 0 || c >= pulse.channels())
      throw InputError("robustness channel index out of range");
  if (!std::isfinite(robust.delta) || robust.delta < 0.0)
    throw InputError("robustness offset bound must be finite and >= 0");

  const int points = robust.delta == 0.0 ? 1 : robust.grid_points;
  if (points < 1 || (robust.delta > 0.0 && points < 2))
    throw InputError("robustness grid needs at least 2 points per channel");
  const double total =
      std::pow(static_cast<double>(points),
               static_cast<double>(robust.channels.size()));
  if (total > 1e6)
    throw BudgetError("robustness grid exceeds 1e6 evaluation points");

  Eigen::VectorXd offsets(points);
  for (int i = 0; i < points; ++i)
    offsets[i] = points == 1 ? 0.0
                             : -robust.delta + 2.0 * robust.delta * i /
                                                   static_cast<double>(points - 1);

  GridMinimum best;
  best.fidelity = 2.0;  // above any reachable fidelity
  std::vector<int> index(robust.channels.size(), 0);
  for (;;) {
    PulseParams shifted = pulse;
    for (std::size_t j = 0; j < robust.channels.size(); ++j)
      shifted.phi.col(robust.channels[j]).array() += offsets[index[j]];
    const double f = fidelity(spec, shifted, target);
    if (f < best.fidelity) {
      best.fidelity = f;
      best.pulse = std::move(shifted);
    }
    // Odometer: last channel fastest, so the first channel is slowest.
    std::size_t pos = index.size();
    while (pos > 0) {
      --pos;
      if (++index[pos] < points) break;
      index[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

// Explicit matrix A with Q(p) = ||A p||^2 for the quadratic objectives;
// nullopt when the objective is not a quadratic form in the parameters.
std::optional<Eigen::MatrixXd> quadratic_operator(const PulseParams& pulse,
                                                  const QualitySpec& quality) {
  const Eigen::Index length = pulse.segments();
  const Eigen::Index channels = pulse.channels();
  const Eigen::Index params = parameter_count(pulse);
  switch (quality.kind()) {
    case QualitySpec::Kind::Filter: {
      const FilterSpec& filter = quality.filter_spec();
      if (filter.weights.size() != length)
        throw InputError("filter weight count must match segment count");
      check_weights(filter.weights);
      const Eigen::MatrixXd& s = sine_matrix(length);
      const double scale = 2.0 / static_cast<double>(length + 1);
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(length * channels, params);
      for (Eigen::Index k = 0; k < channels; ++k)
        for (Eigen::Index n = 0; n < length; ++n) {
          const double keep = 1.0 - filter.weights[n];
          for (Eigen::Index l = 0; l < length; ++l)
            a(k * length + n, l * channels + k) = keep * scale * s(n, l);
        }
      return a;
    }
    case QualitySpec::Kind::Smooth: {
      const Eigen::Index rows_per_channel = length + 1;
      Eigen::MatrixXd a =
          Eigen::MatrixXd::Zero(rows_per_channel * channels, params);
      for (Eigen::Index k = 0; k < channels; ++k) {
        a(k * rows_per_channel + 0, 0 * channels + k) = 1.0;
        for (Eigen::Index r = 1; r < length; ++r) {
          a(k * rows_per_channel + r, r * channels + k) = 1.0;
          a(k * rows_per_channel + r, (r - 1) * channels + k) = -1.0;
        }
        a(k * rows_per_channel + length, (length - 1) * channels + k) = -1.0;
      }
      return a;
    }
    case QualitySpec::Kind::Composite: {
      std::vector<Eigen::MatrixXd> blocks;
      Eigen::Index rows = 0;
      for (const auto& [weight, term] : quality.terms()) {
        if (weight == 0.0) continue;
        auto block = quadratic_operator(pulse, term);
        if (!block) return std::nullopt;
        *block *= std::sqrt(weight);
        rows += block->rows();
        blocks.push_back(std::move(*block));
      }
      Eigen::MatrixXd a(rows, params);
      Eigen::Index at = 0;
      for (const auto& block : blocks) {
        a.middleRows(at, block.rows()) = block;
        at += block.rows();
      }
      return a;
    }
    default:
      return std::nullopt;
  }
}

// Short backtracking descent over the kernel coordinates for objectives
// without a closed-form minimizer.
Eigen::VectorXd descend_in_kernel(const HamiltonianSpec& spec,
                                  const PulseParams& pulse,
                                  const GateTarget& target,
                                  const QualitySpec& quality,
                                  const KernelBasis& kernel) {
  const Eigen::MatrixXd& z = kernel.basis;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(z.cols());
  double q = quality_value(spec, pulse, target, quality);
  PulseParams current = pulse;
  double step = 1.0;
  constexpr int kMaxIters = 50;
  constexpr double kArmijo = 1e-4;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    const Eigen::VectorXd grad =
        z.transpose() * quality_gradient(spec, current, target, quality);
    const double gnorm2 = grad.squaredNorm();
    if (gnorm2 < 1e-28 * std::max(1.0, q * q)) break;
    bool accepted = false;
    for (double t = step; t > 1e-18; t *= 0.5) {
      const Eigen::VectorXd trial = x - t * grad;
      PulseParams candidate;
      try {
        candidate = apply_parameter_delta(pulse, z * trial);
      } catch (const StepRejectedError&) {
        continue;  // dt would leave the feasible region; shrink
      }
      const double q_trial =
          quality_value(spec, candidate, target, quality);
      if (q_trial <= q - kArmijo * t * gnorm2) {
        x = trial;
        q = q_trial;
        current = std::move(candidate);
        step = std::min(t * 2.0, 1e3);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return x;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

// ---- discrete sine transform (type I) ------------------------------------

Eigen::VectorXd dst1_forward(const Eigen::Ref<const Eigen::VectorXd>& signal) {
  if (signal.size() < 1) throw InputError("dst1_forward needs a non-empty signal");
  const double scale = 2.0 / static_cast<double>(signal.size() + 1);
  return scale * (sine_matrix(signal.size()) * signal);
}

Eigen::VectorXd dst1_inverse(const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  if (coeffs.size() < 1) throw InputError("dst1_inverse needs non-empty coefficients");
  return sine_matrix(coeffs.size()) * coeffs;
}

double dst1_frequency(Eigen::Index n, Eigen::Index length, double dt) {
  if (length < 1) throw InputError("dst1_frequency needs length >= 1");
  if (n < 1 || n > length)
    throw InputError("dst1_frequency mode index must lie in [1, length]");
  if (!std::isfinite(dt) || dt <= 0.0)
    throw InputError("dst1_frequency needs dt > 0");
  return static_cast<double>(n) / (2.0 * static_cast<double>(length + 1) * dt);
}

// ---- filters ---------------------------------------------------------------

FilterSpec make_filter(const std::string& kind, const FilterParams& params,
                       Eigen::Index length, double dt) {
  if (length < 1) throw InputError("make_filter needs length >= 1");
  if (!std::isfinite(dt) || dt <= 0.0) throw InputError("make_filter needs dt > 0");
  const double f_max = dst1_frequency(length, length, dt);
  Eigen::VectorXd weights(length);

  if (kind == "lowpass" || kind == "highpass") {
    const double f_c = params.cutoff;
    if (!std::isfinite(f_c) || f_c <= 0.0 || f_c > f_max)
      throw InputError("filter cutoff must lie in (0, f_max]");
    if (!std::isfinite(params.steepness) || params.steepness <= 0.0)
      throw InputError("filter steepness must be positive");
    for (Eigen::Index n = 1; n <= length; ++n) {
      const double ratio = dst1_frequency(n, length, dt) / f_c;
      const double low = 1.0 / (1.0 + std::pow(ratio, 2.0 * params.steepness));
      weights[n - 1] = kind == "lowpass" ? low : 1.0 - low;
    }
  } else if (kind == "bandstop") {
    const double f_0 = params.center;
    if (!std::isfinite(f_0) || f_0 <= 0.0 || f_0 > f_max)
      throw InputError("bandstop center must lie in (0, f_max]");
    if (!std::isfinite(params.width) || params.width <= 0.0)
      throw InputError("bandstop width must be positive");
    for (Eigen::Index n = 1; n <= length; ++n) {
      const double d = dst1_frequency(n, length, dt) - f_0;
      weights[n - 1] = 1.0 - std::exp(-d * d / (2.0 * params.width * params.width));
    }
  } else {
    throw InputError("unknown filter kind '" + kind + "'");
  }

  weights = weights.cwiseMax(0.0).cwiseMin(1.0);
  return FilterSpec{kind, std::move(weights)};
}

FilterSpec custom_filter(Eigen::VectorXd weights) {
  check_weights(weights);
  return FilterSpec{"custom", std::move(weights)};
}

// ---- quality objectives ----------------------------------------------------

QualitySpec QualitySpec::filter(FilterSpec spec) {
  check_weights(spec.weights);
  QualitySpec q(Kind::Filter);
  q.filter_.push_back(std::move(spec));
  return q;
}

QualitySpec QualitySpec::smooth() { return QualitySpec(Kind::Smooth); }

QualitySpec QualitySpec::robust(RobustSpec spec) {
  if (spec.channels.empty())
    throw InputError("robustness objective needs at least one channel");
  if (!std::isfinite(spec.delta) || spec.delta < 0.0)
    throw InputError("robustness offset bound must be finite and >= 0");
  if (spec.delta > 0.0 && spec.grid_points < 2)
    throw InputError("robustness grid needs at least 2 points per channel");
  QualitySpec q(Kind::Robust);
  q.robust_.push_back(std::move(spec));
  return q;
}

QualitySpec QualitySpec::path() { return QualitySpec(Kind::Path); }

QualitySpec QualitySpec::drift() { return QualitySpec(Kind::Drift); }

QualitySpec QualitySpec::composite(
    std::vector<std::pair<double, QualitySpec>> terms) {
  if (terms.empty())
    throw InputError("composite objective needs at least one term");
  bool any_positive = false;
  for (const auto& [weight, term] : terms) {
    if (!std::isfinite(weight) || weight < 0.0)
      throw InputError("composite weights must be finite and >= 0");
    any_positive = any_positive || weight > 0.0;
  }
  if (!any_positive)
    throw InputError("composite objective needs a positive weight");
  QualitySpec q(Kind::Composite);
  q.terms_ = std::move(terms);
  return q;
}

std::string QualitySpec::name() const {
  switch (kind_) {
    case Kind::Filter: return "filter";
    case Kind::Smooth: return "smooth";
    case Kind::Robust: return "robust";
    case Kind::Path: return "path";
    case Kind::Drift: return "drift";
    case Kind::Composite: return "composite";
  }
  throw InputError("unknown quality kind");
}

const FilterSpec& QualitySpec::filter_spec() const {
  if (kind_ != Kind::Filter)
    throw InputError("quality objective is not a filter");
  return filter_.front();
}

const RobustSpec& QualitySpec::robust_spec() const {
  if (kind_ != Kind::Robust)
    throw InputError("quality objective is not a robustness objective");
  return robust_.front();
}

const std::vector<std::pair<double, QualitySpec>>& QualitySpec::terms() const {
  if (kind_ != Kind::Composite)
    throw InputError("quality objective is not a composite");
  return terms_;
}

double q_filter(const PulseParams& pulse, const FilterSpec& filter) {
  if (filter.weights.size() != pulse.segments())
    throw InputError("filter weight count must match segment count");
  check_weights(filter.weights);
  double total = 0.0;
  for (Eigen::Index k = 0; k < pulse.channels(); ++k) {
    const Eigen::VectorXd coeffs = dst1_forward(pulse.phi.col(k));
    total += ((1.0 - filter.weights.array()) * coeffs.array()).matrix().squaredNorm();
  }
  return total;
}

Eigen::VectorXd grad_q_filter(const PulseParams& pulse,
                              const FilterSpec& filter) {
  if (filter.weights.size() != pulse.segments())
    throw InputError("filter weight count must match segment count");
  check_weights(filter.weights);
  const Eigen::ArrayXd keep2 = (1.0 - filter.weights.array()).square();
  Eigen::MatrixXd per_segment(pulse.segments(), pulse.channels());
  for (Eigen::Index k = 0; k < pulse.channels(); ++k) {
    const Eigen::VectorXd coeffs = dst1_forward(pulse.phi.col(k));
    per_segment.col(k) =
        2.0 * dst1_forward((keep2 * coeffs.array()).matrix());
  }
  return flatten_gradient(pulse, per_segment);
}

double q_smooth(const PulseParams& pulse) {
  const Eigen::Index length = pulse.segments();
  double total = 0.0;
  for (Eigen::Index k = 0; k < pulse.channels(); ++k) {
    const auto phi = pulse.phi.col(k);
    total += phi[0] * phi[0] + phi[length - 1] * phi[length - 1];
    for (Eigen::Index l = 1; l < length; ++l) {
      const double d = phi[l] - phi[l - 1];
      total += d * d;
    }
  }
  return total;
}

Eigen::VectorXd grad_q_smooth(const PulseParams& pulse) {
  const Eigen::Index length = pulse.segments();
  Eigen::MatrixXd per_segment(length, pulse.channels());
  for (Eigen::Index k = 0; k < pulse.channels(); ++k) {
    const auto phi = pulse.phi.col(k);
    for (Eigen::Index l = 0; l < length; ++l) {
      const double left = l > 0 ? phi[l - 1] : 0.0;
      const double right = l + 1 < length ? phi[l + 1] : 0.0;
      per_segment(l, k) = 2.0 * (2.0 * phi[l] - left - right);
    }
  }
  return flatten_gradient(pulse, per_segment);
}

Eigen::VectorXd smooth_direct_solve(const PulseParams& pulse,
                                    const KernelBasis& kernel) {
  if (kernel.basis.rows() != parameter_count(pulse))
    throw InputError("kernel basis does not match the pulse parameters");
  const auto a = quadratic_operator(pulse, QualitySpec::smooth());
  const Eigen::MatrixXd lhs = *a * kernel.basis;
  const Eigen::VectorXd rhs = -(*a * flatten_parameters(pulse));
  return lhs.completeOrthogonalDecomposition().solve(rhs);
}

double q_robust(const HamiltonianSpec& spec, const PulseParams& pulse,
                const GateTarget& target, const RobustSpec& robust) {
  return 1.0 - robust_grid_minimum(spec, pulse, target, robust).fidelity;
}

Eigen::VectorXd grad_q_robust(const HamiltonianSpec& spec,
                              const PulseParams& pulse,
                              const GateTarget& target,
                              const RobustSpec& robust) {
  const GridMinimum worst = robust_grid_minimum(spec, pulse, target, robust);
  return -fidelity_gradient(spec, worst.pulse, target);
}

double q_path(const HamiltonianSpec& spec, const PulseParams& pulse) {
  validate_pulse(spec, pulse);
  const double g2 = drift_norm_squared(spec);
  double total = 0.0;
  for (Eigen::Index l = 0; l < pulse.segments(); ++l)
    total += std::sqrt(pulse.phi.row(l).squaredNorm() + g2);
  return total * pulse.dt;
}

Eigen::VectorXd grad_q_path(const HamiltonianSpec& spec,
                            const PulseParams& pulse) {
  validate_pulse(spec, pulse);
  if (!pulse.optimize_dt)
    throw InputError("path-length gradient needs optimize_dt");
  const double g2 = drift_norm_squared(spec);
  Eigen::MatrixXd per_segment(pulse.segments(), pulse.channels());
  double dt_component = 0.0;
  for (Eigen::Index l = 0; l < pulse.segments(); ++l) {
    const double speed = std::sqrt(pulse.phi.row(l).squaredNorm() + g2);
    dt_component += speed;
    if (speed > 0.0)
      per_segment.row(l) = pulse.phi.row(l) * (pulse.dt / speed);
    else
      per_segment.row(l).setZero();
  }
  return flatten_gradient(pulse, per_segment, dt_component);
}

double q_drift(const PulseParams& pulse) {
  if (!pulse.optimize_dt)
    throw InputError("duration objective needs optimize_dt");
  return pulse.dt;
}

Eigen::VectorXd grad_q_drift(const PulseParams& pulse) {
  if (!pulse.optimize_dt)
    throw InputError("duration objective needs optimize_dt");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(parameter_count(pulse));
  grad[grad.size() - 1] = 1.0;
  return grad;
}

// ---- dispatchers ------------------------------------------------------------

double quality_value(const HamiltonianSpec& spec, const PulseParams& pulse,
                     const GateTarget& target, const QualitySpec& quality) {
  switch (quality.kind()) {
    case QualitySpec::Kind::Filter:
      return q_filter(pulse, quality.filter_spec());
    case QualitySpec::Kind::Smooth:
      return q_smooth(pulse);
    case QualitySpec::Kind::Robust:
      return q_robust(spec, pulse, target, quality.robust_spec());
    case QualitySpec::Kind::Path:
      return q_path(spec, pulse);
    case QualitySpec::Kind::Drift:
      return q_drift(pulse);
    case QualitySpec::Kind::Composite: {
      double total = 0.0;
      for (const auto& [weight, term] : quality.terms())
        if (weight > 0.0)
          total += weight * quality_value(spec, pulse, target, term);
      return total;
    }
  }
  throw InputError("unknown quality kind");
}

Eigen::VectorXd quality_gradient(const HamiltonianSpec& spec,
                                 const PulseParams& pulse,
                                 const GateTarget& target,
                                 const QualitySpec& quality) {
  switch (quality.kind()) {
    case QualitySpec::Kind::Filter:
      return grad_q_filter(pulse, quality.filter_spec());
    case QualitySpec::Kind::Smooth:
      return grad_q_smooth(pulse);
    case QualitySpec::Kind::Robust:
      return grad_q_robust(spec, pulse, target, quality.robust_spec());
    case QualitySpec::Kind::Path:
      return grad_q_path(spec, pulse);
    case QualitySpec::Kind::Drift:
      return grad_q_drift(pulse);
    case QualitySpec::Kind::Composite: {
      Eigen::VectorXd total = Eigen::VectorXd::Zero(parameter_count(pulse));
      for (const auto& [weight, term] : quality.terms())
        if (weight > 0.0)
          total += weight * quality_gradient(spec, pulse, target, term);
      return total;
    }
  }
  throw InputError("unknown quality kind");
}

Eigen::VectorXd quality_direct_solve(const HamiltonianSpec& spec,
                                     const PulseParams& pulse,
                                     const GateTarget& target,
                                     const QualitySpec& quality,
                                     const KernelBasis& kernel) {
  validate_pulse(spec, pulse);
  if (kernel.basis.rows() != parameter_count(pulse))
    throw InputError("kernel basis does not match the pulse parameters");
  if (kernel.dimension() == 0) return Eigen::VectorXd::Zero(0);
  if (const auto a = quadratic_operator(pulse, quality)) {
    const Eigen::MatrixXd lhs = *a * kernel.basis;
    const Eigen::VectorXd rhs = -(*a * flatten_parameters(pulse));
    return lhs.completeOrthogonalDecomposition().solve(rhs);
  }
  return descend_in_kernel(spec, pulse, target, quality, kernel);
}

// ---- Gaussian-filter baseline ----------------------------------------------

PulseParams gaussian_baseline(const PulseParams& pulse, double sigma, int pad) {
  if (!std::isfinite(sigma) || sigma <= 0.0)
    throw InputError("gaussian_baseline needs sigma > 0");
  if (pad < 0) throw InputError("gaussian_baseline needs pad >= 0");
  if (pulse.segments() < 1) throw InputError("pulse needs at least one segment");

  const Eigen::Index length = pulse.segments();
  const Eigen::Index padded = length + 2 * static_cast<Eigen::Index>(pad);
  const Eigen::Index radius =
      static_cast<Eigen::Index>(std::ceil(4.0 * sigma));
  Eigen::VectorXd kernel(2 * radius + 1);
  for (Eigen::Index j = -radius; j <= radius; ++j)
    kernel[j + radius] =
        std::exp(-static_cast<double>(j * j) / (2.0 * sigma * sigma));
  kernel /= kernel.sum();

  // Reflected indexing (d c b a | a b c d | d c b a) on the padded signal,
  // so the zero padding pulls the smoothed pulse toward zero at the ends.
  const auto reflect = [padded](Eigen::Index i) {
    while (i < 0 || i >= padded) {
      if (i < 0) i = -1 - i;
      if (i >= padded) i = 2 * padded - 1 - i;
    }
    return i;
  };

  PulseParams smoothed = pulse;
  for (Eigen::Index k = 0; k < pulse.channels(); ++k) {
    Eigen::VectorXd signal = Eigen::VectorXd::Zero(padded);
    signal.segment(pad, length) = pulse.phi.col(k);
    for (Eigen::Index i = 0; i < length; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = -radius; j <= radius; ++j)
        acc += kernel[j + radius] * signal[reflect(pad + i - j)];
      smoothed.phi(i, k) = acc;
    }
  }
  return smoothed;
}

// ---- CSV emission -----------------------------------------------------------

void write_spectrum_csv(const std::string& path, const PulseParams& before,
                        const PulseParams& after,
                        const Eigen::VectorXd& weights) {
  const Eigen::Index length = before.segments();
  const Eigen::Index channels = before.channels();
  if (after.segments() != length || after.channels() != channels ||
      after.dt != before.dt)
    throw InputError("spectrum pulses must share shape and dt");
  if (weights.size() != length)
    throw InputError("spectrum weight count must match segment count");

  std::ofstream out = open_csv(path);
  out << "mode_n,freq_per_time,power_before,power_after,weight\n";
  for (Eigen::Index k = 0; k < channels; ++k) {
    const Eigen::VectorXd c_before = dst1_forward(before.phi.col(k));
    const Eigen::VectorXd c_after = dst1_forward(after.phi.col(k));
    for (Eigen::Index n = 1; n <= length; ++n) {
      out << n << ','
          << detail::fmt_real(dst1_frequency(n, length, before.dt)) << ','
          << detail::fmt_real(c_before[n - 1] * c_before[n - 1]) << ','
          << detail::fmt_real(c_after[n - 1] * c_after[n - 1]) << ','
          << detail::fmt_real(weights[n - 1]) << '\n';
    }
  }
  if (!out) throw FormatError("failed writing '" + path + "'");
}

void write_robust_sweep_csv(const std::string& path,
                            const Eigen::VectorXd& offsets,
                            const Eigen::VectorXd& fidelities) {
  if (offsets.size() != fidelities.size())
    throw InputError("sweep offsets and fidelities must have equal length");
  std::ofstream out = open_csv(path);
  out << "delta_offset,fidelity\n";
  for (Eigen::Index i = 0; i < offsets.size(); ++i)
    out << detail::fmt_real(offsets[i]) << ','
        << detail::fmt_real(fidelities[i]) << '\n';
  if (!out) throw FormatError("failed writing '" + path + "'");
}

}  // namespace gecko
