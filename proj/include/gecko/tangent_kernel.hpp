#pragma once

#include <Eigen/Dense>

#include "gecko/pulse_model.hpp"

namespace gecko {

/// Real Jacobian of the gate unitary with respect to all free pulse
/// parameters. Row i is the coefficient along pauli_basis(n)[i] of the
/// left-translated derivative; column j is parameter j in the flattened
/// order below.
///
/// Parameter flattening convention (shared by every consumer):
/// phi entries come first, segment-major ((l,k) -> l*K + k), and dt is the
/// final extra column iff the pulse has optimize_dt set.
struct JacobianMatrix {
  Eigen::MatrixXd entries;  // (N^2 - 1) x P
  Eigen::Index segments = 0;
  int channels = 0;
  bool has_dt_column = false;

  Eigen::Index parameter_count() const { return entries.cols(); }
};

/// Orthonormal basis of the Jacobian's (right) nullspace: the directions in
/// parameter space that leave the implemented unitary unchanged to first
/// order. tolerance is the absolute singular-value threshold actually used;
/// rank counts singular values above it, so dimension() == P - rank always.
struct KernelBasis {
  Eigen::MatrixXd basis;  // P x R, orthonormal columns
  Eigen::VectorXd singular_values;
  double tolerance = 0.0;
  Eigen::Index rank = 0;

  Eigen::Index dimension() const { return basis.cols(); }
};

/// Outcome of one fidelity-preserving update.
struct StepResult {
  PulseParams pulse;
  double step_norm = 0.0;
  /// First-order prediction grad_q . delta of the quality change; zero when
  /// no gradient was supplied.
  double predicted_dq = 0.0;
  double fidelity_after = 0.0;
};

/// Gate unitary plus its raw matrix derivatives with respect to every free
/// parameter (same flattened order as JacobianMatrix). This is the complex
/// form shared by the real Jacobian and by gradients of any scalar built
/// from U_G, such as the fidelity.
struct PulseDerivatives {
  Eigen::MatrixXcd unitary;                // U_G
  std::vector<Eigen::MatrixXcd> columns;   // dU_G / d theta_j
};

/// Number of free parameters of the pulse (L*K, +1 when optimize_dt).
Eigen::Index parameter_count(const PulseParams& pulse);

/// Pulse parameters in the flattened convention above.
Eigen::VectorXd flatten_parameters(const PulseParams& pulse);

/// Adds a flattened delta to the pulse parameters. A delta that would push
/// dt to zero or below raises StepRejectedError (callers shrink the step).
PulseParams apply_parameter_delta(const PulseParams& pulse,
                                  const Eigen::Ref<const Eigen::VectorXd>& delta);

/// Builds U_G and all matrix derivatives with one eigenfactorization per
/// segment and cached prefix/suffix products (cost O(L) factorizations +
/// O(LK) column assemblies).
PulseDerivatives pulse_derivatives(const HamiltonianSpec& spec,
                                   const PulseParams& pulse);

/// Real Jacobian: column j is algebra_project(U_G^dag * dU_G/d theta_j),
/// i.e. the left-translated derivative with the global-phase component
/// dropped.
JacobianMatrix pulse_jacobian(const HamiltonianSpec& spec,
                              const PulseParams& pulse);

/// SVD-based nullspace extraction. A singular value counts as zero when it
/// is at most tol_rel times the largest one (everything counts as zero when
/// the Jacobian vanishes entirely, in which case the basis is the identity).
KernelBasis kernel_basis(const JacobianMatrix& jacobian,
                         double tol_rel = 1e-10);

/// Coordinates of the steepest quality descent within the nullspace:
/// dx = -Z^T grad_q, the minimizer of ||Z x + grad_q||^2.
Eigen::VectorXd project_gradient(const KernelBasis& kernel,
                                 const Eigen::Ref<const Eigen::VectorXd>& grad_q);

/// Moves the pulse by exactly step_size along the normalized nullspace
/// direction Z dx and reports the recomputed fidelity. grad_q (optional)
/// only feeds the predicted_dq diagnostic.
StepResult take_step(const HamiltonianSpec& spec, const PulseParams& pulse,
                     const GateTarget& target, const KernelBasis& kernel,
                     const Eigen::Ref<const Eigen::VectorXd>& dx,
                     double step_size,
                     const Eigen::VectorXd* grad_q = nullptr);

}  // namespace gecko
