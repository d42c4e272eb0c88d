#include "gecko/tangent_kernel.hpp"

#include <complex>
#include <string>
#include <vector>

#include "gecko/errors.hpp"

namespace gecko {

namespace {

using Complex = std::complex<double>;

}  // namespace

Eigen::Index parameter_count(const PulseParams& pulse) {
  return pulse.segments() * pulse.channels() + (pulse.optimize_dt ? 1 : 0);
}

Eigen::VectorXd flatten_parameters(const PulseParams& pulse) {
  Eigen::VectorXd out(parameter_count(pulse));
  const Eigen::Index lk = pulse.segments() * pulse.channels();
  for (Eigen::Index l = 0; l < pulse.segments(); ++l)
    for (Eigen::Index k = 0; k < pulse.channels(); ++k)
      out(l * pulse.channels() + k) = pulse.phi(l, k);
  if (pulse.optimize_dt) out(lk) = pulse.dt;
  return out;
}

PulseParams apply_parameter_delta(
    const PulseParams& pulse, const Eigen::Ref<const Eigen::VectorXd>& delta) {
  if (delta.size() != parameter_count(pulse))
    throw InputError("parameter delta has " + std::to_string(delta.size()) +
                     " entries, expected " +
                     std::to_string(parameter_count(pulse)));
  PulseParams out = pulse;
  for (Eigen::Index l = 0; l < pulse.segments(); ++l)
    for (Eigen::Index k = 0; k < pulse.channels(); ++k)
      out.phi(l, k) += delta(l * pulse.channels() + k);
  if (pulse.optimize_dt) {
    out.dt = pulse.dt + delta(delta.size() - 1);
    if (!(out.dt > 0.0))
      throw StepRejectedError("step drives dt to " + std::to_string(out.dt) +
                              "; shrink the step size");
  }
  return out;
}

PulseDerivatives pulse_derivatives(const HamiltonianSpec& spec,
                                   const PulseParams& pulse) {
  validate_pulse(spec, pulse);
  const Eigen::Index L = pulse.segments();
  const int K = spec.channels();
  const Eigen::Index dim = spec.dim();

  // One Hermitian factorization per segment, reused for the unitary and for
  // every directional derivative within that segment.
  std::vector<HermitianEigen> factors;
  std::vector<Eigen::MatrixXcd> unitaries;
  std::vector<Eigen::MatrixXcd> hamiltonians;
  factors.reserve(static_cast<std::size_t>(L));
  unitaries.reserve(static_cast<std::size_t>(L));
  hamiltonians.reserve(static_cast<std::size_t>(L));
  for (Eigen::Index l = 0; l < L; ++l) {
    hamiltonians.push_back(spec.hamiltonian(pulse.phi.row(l).transpose()));
    factors.push_back(HermitianEigen::factorize(hamiltonians.back()));
    unitaries.push_back(factors.back().unitary(pulse.dt));
  }

  // prefix[l] = U_{l-1} ... U_0 (identity at l = 0);
  // suffix[l] = U_{L-1} ... U_{l+1} (identity at l = L-1).
  std::vector<Eigen::MatrixXcd> prefix(static_cast<std::size_t>(L)),
      suffix(static_cast<std::size_t>(L));
  prefix[0] = Eigen::MatrixXcd::Identity(dim, dim);
  for (Eigen::Index l = 1; l < L; ++l)
    prefix[static_cast<std::size_t>(l)] =
        unitaries[static_cast<std::size_t>(l - 1)] *
        prefix[static_cast<std::size_t>(l - 1)];
  suffix[static_cast<std::size_t>(L - 1)] =
      Eigen::MatrixXcd::Identity(dim, dim);
  for (Eigen::Index l = L - 2; l >= 0; --l)
    suffix[static_cast<std::size_t>(l)] =
        suffix[static_cast<std::size_t>(l + 1)] *
        unitaries[static_cast<std::size_t>(l + 1)];

  PulseDerivatives result;
  result.unitary = suffix[0] * unitaries[0];  // full product U_{L-1} ... U_0
  result.columns.reserve(static_cast<std::size_t>(parameter_count(pulse)));

  for (Eigen::Index l = 0; l < L; ++l) {
    const auto& factor = factors[static_cast<std::size_t>(l)];
    for (int k = 0; k < K; ++k) {
      const Eigen::MatrixXcd segment_derivative = factor.directional_derivative(
          spec.controls()[static_cast<std::size_t>(k)].generator(), pulse.dt);
      result.columns.push_back(suffix[static_cast<std::size_t>(l)] *
                               segment_derivative *
                               prefix[static_cast<std::size_t>(l)]);
    }
  }

  if (pulse.optimize_dt) {
    // dt is shared by all segments: dU_G/dt = sum_l suffix * (-i H_l U_l) * prefix.
    Eigen::MatrixXcd derivative = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index l = 0; l < L; ++l) {
      const std::size_t i = static_cast<std::size_t>(l);
      derivative += suffix[i] *
                    (Complex(0, -1) * hamiltonians[i] * unitaries[i]) *
                    prefix[i];
    }
    result.columns.push_back(std::move(derivative));
  }

  return result;
}

JacobianMatrix pulse_jacobian(const HamiltonianSpec& spec,
                              const PulseParams& pulse) {
  const PulseDerivatives derivatives = pulse_derivatives(spec, pulse);
  const Eigen::MatrixXcd u_gate_adj = derivatives.unitary.adjoint();
  const Eigen::Index rows = spec.dim() * spec.dim() - 1;

  JacobianMatrix jac;
  jac.segments = pulse.segments();
  jac.channels = spec.channels();
  jac.has_dt_column = pulse.optimize_dt;
  jac.entries.resize(rows, parameter_count(pulse));
  for (std::size_t j = 0; j < derivatives.columns.size(); ++j)
    jac.entries.col(static_cast<Eigen::Index>(j)) =
        algebra_project(u_gate_adj * derivatives.columns[j]);
  return jac;
}

KernelBasis kernel_basis(const JacobianMatrix& jacobian, double tol_rel) {
  if (!jacobian.entries.allFinite())
    throw InputError("Jacobian contains non-finite entries");
  if (!(tol_rel > 0.0))
    throw InputError("kernel tolerance must be positive");
  const Eigen::Index params = jacobian.entries.cols();

  KernelBasis kernel;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(jacobian.entries, Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw NumericalError("SVD of the Jacobian failed to converge");
  kernel.singular_values = svd.singularValues();

  const double sigma_max =
      kernel.singular_values.size() > 0 ? kernel.singular_values(0) : 0.0;
  if (sigma_max == 0.0) {
    // Fully degenerate Jacobian: every direction is kernel.
    kernel.tolerance = 0.0;
    kernel.rank = 0;
    kernel.basis = Eigen::MatrixXd::Identity(params, params);
    return kernel;
  }

  kernel.tolerance = tol_rel * sigma_max;
  Eigen::Index rank = 0;
  while (rank < kernel.singular_values.size() &&
         kernel.singular_values(rank) > kernel.tolerance)
    ++rank;
  kernel.rank = rank;
  // Right singular vectors are sorted by decreasing singular value, so the
  // kernel is everything from column `rank` on (including the columns past
  // min(m, P), which have no singular value at all).
  kernel.basis = svd.matrixV().rightCols(params - rank);
  return kernel;
}

Eigen::VectorXd project_gradient(
    const KernelBasis& kernel, const Eigen::Ref<const Eigen::VectorXd>& grad_q) {
  if (grad_q.size() != kernel.basis.rows())
    throw InputError("gradient has " + std::to_string(grad_q.size()) +
                     " entries, kernel basis expects " +
                     std::to_string(kernel.basis.rows()));
  return -kernel.basis.transpose() * grad_q;
}

StepResult take_step(const HamiltonianSpec& spec, const PulseParams& pulse,
                     const GateTarget& target, const KernelBasis& kernel,
                     const Eigen::Ref<const Eigen::VectorXd>& dx,
                     double step_size, const Eigen::VectorXd* grad_q) {
  if (dx.size() != kernel.dimension())
    throw InputError("dx has " + std::to_string(dx.size()) +
                     " entries, kernel dimension is " +
                     std::to_string(kernel.dimension()));
  if (!(step_size > 0.0)) throw InputError("step size must be positive");

  const Eigen::VectorXd direction = kernel.basis * dx;
  const double norm = direction.norm();
  if (norm < 1e-200)
    throw DegenerateStepError(
        "update direction vanishes in the nullspace (stationary point)");

  const Eigen::VectorXd delta = (step_size / norm) * direction;
  StepResult result;
  result.pulse = apply_parameter_delta(pulse, delta);
  result.step_norm = step_size;
  result.predicted_dq = grad_q ? grad_q->dot(delta) : 0.0;
  result.fidelity_after = fidelity(spec, result.pulse, target);
  return result;
}

}  // namespace gecko
