#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gecko/operator_core.hpp"

namespace gecko {

/// One drift term: a fixed Pauli string with a constant strength
/// (an angular frequency; hbar = 1 throughout).
struct DriftTerm {
  PauliString op;
  double strength;
};

/// One control channel. The channel's Hermitian generator is a weighted sum
/// of Pauli strings (a single string in the simplest case) and is scaled by
/// one real amplitude per segment. Channels that drive several qubits
/// simultaneously (e.g. XI+IX) therefore count as one parameter per segment.
class ControlChannel {
 public:
  explicit ControlChannel(std::vector<std::pair<PauliString, double>> terms);

  const std::vector<std::pair<PauliString, double>>& terms() const {
    return terms_;
  }
  /// Cached sum of the weighted term matrices.
  const Eigen::MatrixXcd& generator() const { return generator_; }
  int qubits() const { return qubits_; }
  /// Human-readable label such as "XI" or "XI+IX".
  std::string label() const;

 private:
  std::vector<std::pair<PauliString, double>> terms_;
  Eigen::MatrixXcd generator_;
  int qubits_ = 0;
};

/// Static description of the controllable system: qubit count, constant
/// drift terms, and the ordered control channels.
class HamiltonianSpec {
 public:
  HamiltonianSpec(int n, std::vector<DriftTerm> drift,
                  std::vector<ControlChannel> controls);

  int qubits() const { return n_; }
  Eigen::Index dim() const { return Eigen::Index(1) << n_; }
  const std::vector<DriftTerm>& drift() const { return drift_; }
  const std::vector<ControlChannel>& controls() const { return controls_; }
  /// Number of control channels K (one amplitude each per segment).
  int channels() const { return static_cast<int>(controls_.size()); }
  /// Cached drift matrix sum_d g_d F_d.
  const Eigen::MatrixXcd& drift_matrix() const { return drift_matrix_; }
  /// Segment Hamiltonian H_l = drift + sum_k phi_l[k] * G_k.
  Eigen::MatrixXcd hamiltonian(const Eigen::Ref<const Eigen::VectorXd>& phi_l) const;

 private:
  int n_;
  std::vector<DriftTerm> drift_;
  std::vector<ControlChannel> controls_;
  Eigen::MatrixXcd drift_matrix_;
};

/// Piecewise-constant pulse: row l of phi holds the K channel amplitudes of
/// segment l; every segment lasts dt, so the total duration is L*dt.
/// optimize_dt marks dt itself as a free parameter for solvers that support
/// duration optimization; it does not affect the implemented unitary.
struct PulseParams {
  Eigen::MatrixXd phi;
  double dt = 1.0;
  bool optimize_dt = false;

  Eigen::Index segments() const { return phi.rows(); }
  Eigen::Index channels() const { return phi.cols(); }
  double duration() const { return static_cast<double>(segments()) * dt; }
};

/// Throws InputError unless the pulse is structurally valid for the spec:
/// L >= 1, channel count matches, dt > 0, all entries finite.
void validate_pulse(const HamiltonianSpec& spec, const PulseParams& pulse);

/// Target gate: a named preset or a custom unitary.
struct GateTarget {
  std::string name;  // "CZ", "CNOT", or "custom"
  Eigen::MatrixXcd matrix;
};

/// Named target preset; currently "CZ" -> diag(1,i,i,1) and "CNOT".
GateTarget gate_target(const std::string& name);

/// Custom target from an explicit matrix; rejects non-unitary input.
GateTarget gate_target(const Eigen::MatrixXcd& unitary);

/// U(phi_l) = exp(-i H_l dt) for one segment.
Eigen::MatrixXcd segment_unitary(const HamiltonianSpec& spec,
                                 const Eigen::Ref<const Eigen::VectorXd>& phi_l,
                                 double dt);

/// Full gate unitary U_G = U(phi_L) ... U(phi_1); segment 1 acts first.
Eigen::MatrixXcd pulse_unitary(const HamiltonianSpec& spec,
                               const PulseParams& pulse);

/// Phase-invariant gate fidelity |Tr{U_G^dag U_target}| / N in [0, 1].
double fidelity(const Eigen::MatrixXcd& u_g, const Eigen::MatrixXcd& u_target);
double fidelity(const HamiltonianSpec& spec, const PulseParams& pulse,
                const GateTarget& target);

/// Splits every segment into m equal sub-segments with the same amplitudes:
/// L -> m*L, dt -> dt/m. The implemented unitary is exactly unchanged.
PulseParams refine_pulse(const PulseParams& pulse, int m);

/// Built-in two-qubit transverse-field Ising models:
///   "tfim1"        drift g*ZZ; independent controls XI and IX (K = 2)
///   "tfim1_h2zero" drift g*ZZ; control XI only (K = 1)
///   "tfim2"        drift g*ZZ + (1/2)*IZ; summed controls XI+IX and ZI+IZ
///                  (K = 2, one amplitude per summed channel)
HamiltonianSpec model_preset(const std::string& name, double g = 1.0);

}  // namespace gecko
