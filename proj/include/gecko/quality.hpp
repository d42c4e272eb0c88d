#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gecko/pulse_model.hpp"
#include "gecko/tangent_kernel.hpp"

namespace gecko {

// ---- discrete sine transform (type I) ------------------------------------

/// Forward DST-I with the normalization
///   coeffs_n = (2/(L+1)) sum_l signal_l sin(pi n l / (L+1)),  n, l = 1..L.
Eigen::VectorXd dst1_forward(const Eigen::Ref<const Eigen::VectorXd>& signal);

/// Inverse DST-I: signal_l = sum_n coeffs_n sin(pi n l / (L+1)).
/// inverse(forward(x)) == x to machine precision.
Eigen::VectorXd dst1_inverse(const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// Frequency per unit time of mode n (1-based): f_n = n / (2 (L+1) dt).
double dst1_frequency(Eigen::Index n, Eigen::Index length, double dt);

// ---- filters ---------------------------------------------------------------

/// Shape parameters for the built-in filter kinds; only the fields relevant
/// to the chosen kind are read.
struct FilterParams {
  double cutoff = 0.0;     // lowpass/highpass corner frequency f_c
  double center = 0.0;     // bandstop notch center f_0
  double width = 0.0;      // bandstop Gaussian width (frequency units)
  double steepness = 4.0;  // Butterworth order p for lowpass/highpass
};

/// Per-mode spectral weights in [0, 1]; weight 1 keeps a mode, 0 penalizes
/// it fully in q_filter.
struct FilterSpec {
  std::string kind;  // "lowpass", "highpass", "bandstop", or "custom"
  Eigen::VectorXd weights;
};

/// Builds the weight vector for all L modes of a length-L pulse with segment
/// duration dt. Kinds:
///   lowpass   w_n = 1 / (1 + (f_n/f_c)^(2p))
///   highpass  1 - lowpass
///   bandstop  1 - exp(-(f_n - f_0)^2 / (2 width^2))
/// The corner/center must lie in (0, f_L] where f_L is the highest mode
/// frequency.
FilterSpec make_filter(const std::string& kind, const FilterParams& params,
                       Eigen::Index length, double dt);

/// Wraps externally supplied weights (validated to lie in [0, 1]).
FilterSpec custom_filter(Eigen::VectorXd weights);

// ---- quality objectives ----------------------------------------------------

/// Worst-case robustness settings: every channel in `channels` receives one
/// constant offset per grid point, swept over `grid_points` uniform values
/// spanning [-delta, delta] (Cartesian product across channels).
struct RobustSpec {
  std::vector<int> channels;
  double delta = 0.05;
  int grid_points = 5;
};

/// Tagged union over the supported objectives. Composite nodes hold
/// weighted subobjectives (weights >= 0, at least one positive).
class QualitySpec {
 public:
  enum class Kind { Filter, Smooth, Robust, Path, Drift, Composite };

  static QualitySpec filter(FilterSpec spec);
  static QualitySpec smooth();
  static QualitySpec robust(RobustSpec spec);
  static QualitySpec path();
  static QualitySpec drift();
  static QualitySpec composite(std::vector<std::pair<double, QualitySpec>> terms);

  Kind kind() const { return kind_; }
  /// Lowercase tag ("filter", "smooth", ...) used in metadata and traces.
  std::string name() const;
  const FilterSpec& filter_spec() const;
  const RobustSpec& robust_spec() const;
  const std::vector<std::pair<double, QualitySpec>>& terms() const;

 private:
  explicit QualitySpec(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::vector<FilterSpec> filter_;  // holds one element for Kind::Filter
  std::vector<RobustSpec> robust_;  // holds one element for Kind::Robust
  std::vector<std::pair<double, QualitySpec>> terms_;
};

/// Spectral residual sum_k ||(I - W) dst1_forward(phi_k)||^2.
double q_filter(const PulseParams& pulse, const FilterSpec& filter);
Eigen::VectorXd grad_q_filter(const PulseParams& pulse,
                              const FilterSpec& filter);

/// Roughness ||D Phi||^2 with zero boundary segments on both ends.
double q_smooth(const PulseParams& pulse);
Eigen::VectorXd grad_q_smooth(const PulseParams& pulse);

/// Exact minimizer of Q_smooth(pulse + Z x) over the kernel coordinates x
/// (minimum-norm least-squares solution).
Eigen::VectorXd smooth_direct_solve(const PulseParams& pulse,
                                    const KernelBasis& kernel);

/// Worst-case infidelity over the offset grid: 1 - min_grid F(pulse + delta).
double q_robust(const HamiltonianSpec& spec, const PulseParams& pulse,
                const GateTarget& target, const RobustSpec& robust);
Eigen::VectorXd grad_q_robust(const HamiltonianSpec& spec,
                              const PulseParams& pulse,
                              const GateTarget& target,
                              const RobustSpec& robust);

/// Riemannian path length sum_l sqrt(phi_l . phi_l + g^2) dt where g^2 is
/// the summed squared drift strength.
double q_path(const HamiltonianSpec& spec, const PulseParams& pulse);
/// Includes the dt component; requires pulse.optimize_dt.
Eigen::VectorXd grad_q_path(const HamiltonianSpec& spec,
                            const PulseParams& pulse);

/// Segment duration dt itself; requires pulse.optimize_dt.
double q_drift(const PulseParams& pulse);
Eigen::VectorXd grad_q_drift(const PulseParams& pulse);

// ---- dispatchers ------------------------------------------------------------

/// Value of any objective.
double quality_value(const HamiltonianSpec& spec, const PulseParams& pulse,
                     const GateTarget& target, const QualitySpec& quality);

/// Gradient of any objective over the full flattened parameter vector
/// (length parameter_count(pulse); entries an objective does not depend on
/// are zero).
Eigen::VectorXd quality_gradient(const HamiltonianSpec& spec,
                                 const PulseParams& pulse,
                                 const GateTarget& target,
                                 const QualitySpec& quality);

/// Kernel coordinates x minimizing Q(pulse + Z x). Quadratic objectives
/// (filter, smooth, and composites of them) are solved exactly by
/// least-squares; other objectives fall back to a short projected gradient
/// descent in x.
Eigen::VectorXd quality_direct_solve(const HamiltonianSpec& spec,
                                     const PulseParams& pulse,
                                     const GateTarget& target,
                                     const QualitySpec& quality,
                                     const KernelBasis& kernel);

// ---- Gaussian-filter baseline ----------------------------------------------

/// Classical smoothing baseline: per channel, zero-pad by `pad` samples each
/// side, convolve with a normalized Gaussian of width sigma (in samples,
/// truncated at 4 sigma), and crop back. Does not preserve fidelity.
PulseParams gaussian_baseline(const PulseParams& pulse, double sigma, int pad);

// ---- CSV emission -----------------------------------------------------------

/// Spectrum CSV (columns mode_n,freq_per_time,power_before,power_after,weight),
/// one block of L rows per channel in channel order. Pass the same pulse
/// twice when there is no before/after distinction.
void write_spectrum_csv(const std::string& path, const PulseParams& before,
                        const PulseParams& after,
                        const Eigen::VectorXd& weights);

/// Robust sweep CSV (columns delta_offset,fidelity).
void write_robust_sweep_csv(const std::string& path,
                            const Eigen::VectorXd& offsets,
                            const Eigen::VectorXd& fidelities);

}  // namespace gecko
