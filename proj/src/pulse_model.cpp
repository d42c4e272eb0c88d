#include "gecko/pulse_model.hpp"

#include <cmath>
#include <complex>

#include "gecko/errors.hpp"

namespace gecko {

namespace {

using Complex = std::complex<double>;

}  // namespace

ControlChannel::ControlChannel(
    std::vector<std::pair<PauliString, double>> terms)
    : terms_(std::move(terms)) {
  if (terms_.empty())
    throw InputError("control channel needs at least one Pauli term");
  qubits_ = terms_.front().first.qubits();
  const Eigen::Index dim = terms_.front().first.dim();
  generator_ = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [op, coeff] : terms_) {
    if (op.qubits() != qubits_)
      throw InputError("control channel mixes operators of different sizes");
    if (!std::isfinite(coeff))
      throw InputError("control coefficient must be finite");
    generator_ += coeff * op.matrix();
  }
  // A generator proportional to the identity only shifts the global phase
  // and would make the channel's Jacobian column identically zero.
  const Complex mean = generator_.trace() / static_cast<double>(dim);
  if ((generator_ - mean * Eigen::MatrixXcd::Identity(dim, dim))
          .cwiseAbs()
          .maxCoeff() < 1e-14)
    throw InputError("control channel '" + label() +
                     "' acts as the identity (no effect on the gate)");
}

std::string ControlChannel::label() const {
  std::string out;
  for (const auto& [op, coeff] : terms_) {
    if (!out.empty()) out += coeff < 0 ? "-" : "+";
    else if (coeff < 0) out += "-";
    const double mag = std::abs(coeff);
    if (mag != 1.0) out += std::to_string(mag) + "*";
    out += op.label();
  }
  return out;
}

HamiltonianSpec::HamiltonianSpec(int n, std::vector<DriftTerm> drift,
                                 std::vector<ControlChannel> controls)
    : n_(n), drift_(std::move(drift)), controls_(std::move(controls)) {
  if (n < 1 || n > 10)
    throw InputError("qubit count must be between 1 and 10");
  drift_matrix_ = Eigen::MatrixXcd::Zero(dim(), dim());
  for (const auto& term : drift_) {
    if (term.op.qubits() != n_)
      throw InputError("drift term '" + term.op.label() +
                       "' does not act on " + std::to_string(n_) + " qubits");
    if (!std::isfinite(term.strength))
      throw InputError("drift strength must be finite");
    drift_matrix_ += term.strength * term.op.matrix();
  }
  for (const auto& channel : controls_) {
    if (channel.qubits() != n_)
      throw InputError("control channel '" + channel.label() +
                       "' does not act on " + std::to_string(n_) + " qubits");
  }
}

Eigen::MatrixXcd HamiltonianSpec::hamiltonian(
    const Eigen::Ref<const Eigen::VectorXd>& phi_l) const {
  if (phi_l.size() != channels())
    throw InputError("amplitude vector has " + std::to_string(phi_l.size()) +
                     " entries, expected " + std::to_string(channels()));
  Eigen::MatrixXcd h = drift_matrix_;
  for (int k = 0; k < channels(); ++k)
    h += phi_l(k) * controls_[static_cast<std::size_t>(k)].generator();
  return h;
}

void validate_pulse(const HamiltonianSpec& spec, const PulseParams& pulse) {
  if (pulse.segments() < 1)
    throw InputError("pulse needs at least one segment");
  if (pulse.channels() != spec.channels())
    throw InputError("pulse has " + std::to_string(pulse.channels()) +
                     " channels, spec has " + std::to_string(spec.channels()));
  if (!(pulse.dt > 0.0) || !std::isfinite(pulse.dt))
    throw InputError("segment duration dt must be positive and finite");
  if (!pulse.phi.allFinite())
    throw InputError("pulse amplitudes must all be finite");
}

GateTarget gate_target(const std::string& name) {
  if (name == "CZ") {
    Eigen::MatrixXcd m = Eigen::Vector4cd(Complex(1, 0), Complex(0, 1),
                                          Complex(0, 1), Complex(1, 0))
                             .asDiagonal();
    return GateTarget{"CZ", std::move(m)};
  }
  if (name == "CNOT") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 1) = 1;
    m(2, 3) = 1;
    m(3, 2) = 1;
    return GateTarget{"CNOT", std::move(m)};
  }
  throw InputError("unknown gate target '" + name + "' (known: CZ, CNOT)");
}

GateTarget gate_target(const Eigen::MatrixXcd& unitary) {
  if (unitary.rows() != unitary.cols() || unitary.rows() < 2)
    throw InputError("custom target must be a square matrix");
  const Eigen::MatrixXcd gram = unitary.adjoint() * unitary;
  const double defect =
      (gram - Eigen::MatrixXcd::Identity(unitary.rows(), unitary.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (defect >= 1e-12)
    throw InputError("custom target is not unitary (defect " +
                     std::to_string(defect) + ")");
  return GateTarget{"custom", unitary};
}

Eigen::MatrixXcd segment_unitary(const HamiltonianSpec& spec,
                                 const Eigen::Ref<const Eigen::VectorXd>& phi_l,
                                 double dt) {
  return hermitian_expm(spec.hamiltonian(phi_l), dt);
}

Eigen::MatrixXcd pulse_unitary(const HamiltonianSpec& spec,
                               const PulseParams& pulse) {
  validate_pulse(spec, pulse);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(spec.dim(), spec.dim());
  for (Eigen::Index l = 0; l < pulse.segments(); ++l)
    u = segment_unitary(spec, pulse.phi.row(l).transpose(), pulse.dt) * u;
  return u;
}

double fidelity(const Eigen::MatrixXcd& u_g,
                const Eigen::MatrixXcd& u_target) {
  if (u_g.rows() != u_target.rows() || u_g.cols() != u_target.cols() ||
      u_g.rows() != u_g.cols())
    throw InputError("fidelity needs square matrices of equal dimension");
  const Complex overlap = (u_g.adjoint() * u_target).trace();
  return std::abs(overlap) / static_cast<double>(u_g.rows());
}

double fidelity(const HamiltonianSpec& spec, const PulseParams& pulse,
                const GateTarget& target) {
  if (target.matrix.rows() != spec.dim())
    throw InputError("target dimension does not match the system");
  return fidelity(pulse_unitary(spec, pulse), target.matrix);
}

PulseParams refine_pulse(const PulseParams& pulse, int m) {
  if (m < 2) throw InputError("refinement factor must be at least 2");
  const Eigen::Index l_old = pulse.segments();
  PulseParams out;
  out.phi.resize(l_old * m, pulse.channels());
  for (Eigen::Index l = 0; l < l_old; ++l)
    for (int j = 0; j < m; ++j) out.phi.row(l * m + j) = pulse.phi.row(l);
  out.dt = pulse.dt / m;
  out.optimize_dt = pulse.optimize_dt;
  return out;
}

HamiltonianSpec model_preset(const std::string& name, double g) {
  const auto single = [](const char* label) {
    return ControlChannel({{pauli_operator(label), 1.0}});
  };
  if (name == "tfim1")
    return HamiltonianSpec(2, {{pauli_operator("ZZ"), g}},
                           {single("XI"), single("IX")});
  if (name == "tfim1_h2zero")
    return HamiltonianSpec(2, {{pauli_operator("ZZ"), g}}, {single("XI")});
  if (name == "tfim2")
    return HamiltonianSpec(
        2, {{pauli_operator("ZZ"), g}, {pauli_operator("IZ"), 0.5}},
        {ControlChannel({{pauli_operator("XI"), 1.0},
                         {pauli_operator("IX"), 1.0}}),
         ControlChannel({{pauli_operator("ZI"), 1.0},
                         {pauli_operator("IZ"), 1.0}})});
  throw InputError("unknown model preset '" + name +
                   "' (known: tfim1, tfim1_h2zero, tfim2)");
}

}  // namespace gecko
