#include <optional>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gecko/engine.hpp"
#include "gecko/errors.hpp"
#include "gecko/pulse_io.hpp"
#include "gecko/pulse_model.hpp"
#include "gecko/quality.hpp"
#include "gecko/restorer.hpp"
#include "gecko/tangent_kernel.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_gecko, m) {
  m.doc() =
      "Post-hoc optimization of quantum control pulses along fidelity "
      "level sets";

  // Exceptions: the base first so the specific translators run first.
  auto base = py::register_exception<gecko::Error>(m, "GeckoError");
  py::register_exception<gecko::InputError>(m, "InputError", base.ptr());
  py::register_exception<gecko::FormatError>(m, "FormatError", base.ptr());
  py::register_exception<gecko::NumericalError>(m, "NumericalError",
                                                base.ptr());
  py::register_exception<gecko::DegenerateStepError>(m, "DegenerateStepError",
                                                     base.ptr());
  py::register_exception<gecko::StepRejectedError>(m, "StepRejectedError",
                                                   base.ptr());
  py::register_exception<gecko::BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<gecko::RestoreFailedError>(m, "RestoreFailedError",
                                                    base.ptr());

  // ---- system and pulse ------------------------------------------------
  py::class_<gecko::HamiltonianSpec>(m, "HamiltonianSpec",
                                     "Drift plus control channels; build via "
                                     "model_preset")
      .def("qubits", &gecko::HamiltonianSpec::qubits)
      .def("dim", &gecko::HamiltonianSpec::dim)
      .def("channels", &gecko::HamiltonianSpec::channels)
      .def("drift_matrix", &gecko::HamiltonianSpec::drift_matrix,
           py::return_value_policy::copy);

  m.def("model_preset", &gecko::model_preset, py::arg("name"),
        py::arg("g") = 1.0,
        "Built-in two-qubit models: tfim1, tfim1_h2zero, tfim2");

  py::class_<gecko::GateTarget>(m, "GateTarget")
      .def_readonly("name", &gecko::GateTarget::name)
      .def_readonly("matrix", &gecko::GateTarget::matrix);

  m.def("gate_target",
        py::overload_cast<const std::string&>(&gecko::gate_target),
        py::arg("name"), "Named target gate: CZ or CNOT");
  m.def("gate_target",
        py::overload_cast<const Eigen::MatrixXcd&>(&gecko::gate_target),
        py::arg("unitary"), "Custom unitary target");

  py::class_<gecko::PulseParams>(m, "PulseParams",
                                 "Piecewise-constant pulse: phi is L x K, "
                                 "every segment lasts dt")
      .def(py::init<>())
      .def(py::init([](Eigen::MatrixXd phi, double dt, bool optimize_dt) {
             gecko::PulseParams pulse;
             pulse.phi = std::move(phi);
             pulse.dt = dt;
             pulse.optimize_dt = optimize_dt;
             return pulse;
           }),
           py::arg("phi"), py::arg("dt") = 1.0, py::arg("optimize_dt") = false)
      .def_readwrite("phi", &gecko::PulseParams::phi)
      .def_readwrite("dt", &gecko::PulseParams::dt)
      .def_readwrite("optimize_dt", &gecko::PulseParams::optimize_dt)
      .def("segments", &gecko::PulseParams::segments)
      .def("channels", &gecko::PulseParams::channels)
      .def("duration", &gecko::PulseParams::duration);

  m.def("validate_pulse", &gecko::validate_pulse, py::arg("spec"),
        py::arg("pulse"));
  m.def("segment_unitary", &gecko::segment_unitary, py::arg("spec"),
        py::arg("phi_l"), py::arg("dt"));
  m.def("pulse_unitary", &gecko::pulse_unitary, py::arg("spec"),
        py::arg("pulse"), "Full gate unitary; segment 1 acts first");
  m.def("fidelity",
        py::overload_cast<const Eigen::MatrixXcd&, const Eigen::MatrixXcd&>(
            &gecko::fidelity),
        py::arg("u_g"), py::arg("u_target"));
  m.def("fidelity",
        py::overload_cast<const gecko::HamiltonianSpec&,
                          const gecko::PulseParams&, const gecko::GateTarget&>(
            &gecko::fidelity),
        py::arg("spec"), py::arg("pulse"), py::arg("target"),
        "Phase-invariant gate fidelity |Tr{U_G^dag U_target}| / N");
  m.def("refine_pulse", &gecko::refine_pulse, py::arg("pulse"), py::arg("m"),
        "Split every segment into m equal sub-segments (unitary unchanged)");

  // ---- tangent space ------------------------------------------------------
  py::class_<gecko::JacobianMatrix>(m, "JacobianMatrix")
      .def_readonly("entries", &gecko::JacobianMatrix::entries)
      .def_readonly("segments", &gecko::JacobianMatrix::segments)
      .def_readonly("channels", &gecko::JacobianMatrix::channels)
      .def_readonly("has_dt_column", &gecko::JacobianMatrix::has_dt_column)
      .def("parameter_count", &gecko::JacobianMatrix::parameter_count);

  py::class_<gecko::KernelBasis>(m, "KernelBasis")
      .def_readonly("basis", &gecko::KernelBasis::basis)
      .def_readonly("singular_values", &gecko::KernelBasis::singular_values)
      .def_readonly("tolerance", &gecko::KernelBasis::tolerance)
      .def_readonly("rank", &gecko::KernelBasis::rank)
      .def("dimension", &gecko::KernelBasis::dimension);

  py::class_<gecko::StepResult>(m, "StepResult")
      .def_readonly("pulse", &gecko::StepResult::pulse)
      .def_readonly("step_norm", &gecko::StepResult::step_norm)
      .def_readonly("predicted_dq", &gecko::StepResult::predicted_dq)
      .def_readonly("fidelity_after", &gecko::StepResult::fidelity_after);

  m.def("parameter_count", &gecko::parameter_count, py::arg("pulse"));
  m.def("flatten_parameters", &gecko::flatten_parameters, py::arg("pulse"));
  m.def("apply_parameter_delta", &gecko::apply_parameter_delta,
        py::arg("pulse"), py::arg("delta"));
  m.def("pulse_jacobian", &gecko::pulse_jacobian, py::arg("spec"),
        py::arg("pulse"),
        "Real Jacobian of the gate unitary over all free parameters");
  m.def("kernel_basis", &gecko::kernel_basis, py::arg("jacobian"),
        py::arg("tol_rel") = 1e-10,
        "Orthonormal basis of the Jacobian nullspace");
  m.def("project_gradient", &gecko::project_gradient, py::arg("kernel"),
        py::arg("grad_q"), "Steepest in-kernel descent coordinates -Z^T g");
  m.def(
      "take_step",
      [](const gecko::HamiltonianSpec& spec, const gecko::PulseParams& pulse,
         const gecko::GateTarget& target, const gecko::KernelBasis& kernel,
         const Eigen::VectorXd& dx, double step_size,
         std::optional<Eigen::VectorXd> grad_q) {
        return gecko::take_step(spec, pulse, target, kernel, dx, step_size,
                                grad_q ? &*grad_q : nullptr);
      },
      py::arg("spec"), py::arg("pulse"), py::arg("target"), py::arg("kernel"),
      py::arg("dx"), py::arg("step_size"), py::arg("grad_q") = py::none(),
      "Move by exactly step_size along the normalized kernel direction");

  // ---- fidelity restoration ------------------------------------------------
  py::class_<gecko::RestoreConfig>(m, "RestoreConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &gecko::RestoreConfig::epsilon)
      .def_readwrite("max_iters", &gecko::RestoreConfig::max_iters)
      .def_readwrite("initial_step", &gecko::RestoreConfig::initial_step)
      .def_readwrite("shrink", &gecko::RestoreConfig::shrink)
      .def_readwrite("armijo_c", &gecko::RestoreConfig::armijo_c)
      .def_readwrite("seed", &gecko::RestoreConfig::seed)
      .def_readwrite("conjugate_directions",
                     &gecko::RestoreConfig::conjugate_directions);

  m.def("fidelity_gradient", &gecko::fidelity_gradient, py::arg("spec"),
        py::arg("pulse"), py::arg("target"));
  m.def("restore", &gecko::restore, py::arg("spec"), py::arg("pulse"),
        py::arg("target"), py::arg("cfg") = gecko::RestoreConfig{},
        "Gradient ascent on the fidelity until F > 1 - epsilon");
  m.def("random_pulse", &gecko::random_pulse, py::arg("spec"),
        py::arg("segments"), py::arg("dt"), py::arg("amplitude_scale"),
        py::arg("seed"), "Deterministic uniform random pulse");

  // ---- quality functions ----------------------------------------------------
  py::class_<gecko::FilterParams>(m, "FilterParams")
      .def(py::init<>())
      .def_readwrite("cutoff", &gecko::FilterParams::cutoff)
      .def_readwrite("center", &gecko::FilterParams::center)
      .def_readwrite("width", &gecko::FilterParams::width)
      .def_readwrite("steepness", &gecko::FilterParams::steepness);

  py::class_<gecko::FilterSpec>(m, "FilterSpec")
      .def_readonly("kind", &gecko::FilterSpec::kind)
      .def_readonly("weights", &gecko::FilterSpec::weights);

  m.def("make_filter", &gecko::make_filter, py::arg("kind"), py::arg("params"),
        py::arg("length"), py::arg("dt"),
        "Per-mode weights: lowpass, highpass, or bandstop");
  m.def("custom_filter", &gecko::custom_filter, py::arg("weights"));

  py::class_<gecko::RobustSpec>(m, "RobustSpec")
      .def(py::init<>())
      .def_readwrite("channels", &gecko::RobustSpec::channels)
      .def_readwrite("delta", &gecko::RobustSpec::delta)
      .def_readwrite("grid_points", &gecko::RobustSpec::grid_points);

  py::class_<gecko::QualitySpec>(m, "QualitySpec")
      .def_static("filter", &gecko::QualitySpec::filter, py::arg("spec"))
      .def_static("smooth", &gecko::QualitySpec::smooth)
      .def_static("robust", &gecko::QualitySpec::robust, py::arg("spec"))
      .def_static("path", &gecko::QualitySpec::path)
      .def_static("drift", &gecko::QualitySpec::drift)
      .def_static("composite", &gecko::QualitySpec::composite,
                  py::arg("terms"))
      .def("name", &gecko::QualitySpec::name);

  m.def("quality_value", &gecko::quality_value, py::arg("spec"),
        py::arg("pulse"), py::arg("target"), py::arg("quality"));
  m.def("quality_gradient", &gecko::quality_gradient, py::arg("spec"),
        py::arg("pulse"), py::arg("target"), py::arg("quality"));
  m.def("quality_direct_solve", &gecko::quality_direct_solve, py::arg("spec"),
        py::arg("pulse"), py::arg("target"), py::arg("quality"),
        py::arg("kernel"),
        "Kernel coordinates minimizing Q(pulse + Z x)");

  m.def("dst1_forward", &gecko::dst1_forward, py::arg("signal"));
  m.def("dst1_inverse", &gecko::dst1_inverse, py::arg("coeffs"));
  m.def("dst1_frequency", &gecko::dst1_frequency, py::arg("n"),
        py::arg("length"), py::arg("dt"),
        "Frequency per unit time of 1-based mode n");
  m.def("gaussian_baseline", &gecko::gaussian_baseline, py::arg("pulse"),
        py::arg("sigma"), py::arg("pad"),
        "Classical Gaussian smoothing (does not preserve fidelity)");

  // ---- level-set engine -------------------------------------------------------
  py::enum_<gecko::StepMode>(m, "StepMode")
      .value("ProjectGradient", gecko::StepMode::ProjectGradient)
      .value("DirectSolve", gecko::StepMode::DirectSolve);

  py::enum_<gecko::GeckoStatus>(m, "GeckoStatus")
      .value("Converged", gecko::GeckoStatus::Converged)
      .value("BudgetExhausted", gecko::GeckoStatus::BudgetExhausted)
      .value("Stationary", gecko::GeckoStatus::Stationary);

  m.def("status_name", &gecko::status_name, py::arg("status"));

  py::class_<gecko::GeckoConfig>(m, "GeckoConfig")
      .def(py::init<>())
      .def_readwrite("step_size", &gecko::GeckoConfig::step_size)
      .def_readwrite("max_iters", &gecko::GeckoConfig::max_iters)
      .def_readwrite("q_aim", &gecko::GeckoConfig::q_aim)
      .def_readwrite("epsilon", &gecko::GeckoConfig::epsilon)
      .def_readwrite("restore_every", &gecko::GeckoConfig::restore_every)
      .def_readwrite("tol_rel", &gecko::GeckoConfig::tol_rel)
      .def_readwrite("mode", &gecko::GeckoConfig::mode);

  py::class_<gecko::TraceRecord>(m, "TraceRecord")
      .def_readonly("iter", &gecko::TraceRecord::iter)
      .def_readonly("quality", &gecko::TraceRecord::quality)
      .def_readonly("fidelity", &gecko::TraceRecord::fidelity)
      .def_readonly("kernel_dim", &gecko::TraceRecord::kernel_dim)
      .def_readonly("step_norm", &gecko::TraceRecord::step_norm)
      .def_readonly("restored", &gecko::TraceRecord::restored);

  py::class_<gecko::GeckoTrace>(m, "GeckoTrace")
      .def_readonly("records", &gecko::GeckoTrace::records)
      .def_readonly("pulse", &gecko::GeckoTrace::pulse)
      .def_readonly("status", &gecko::GeckoTrace::status);

  m.def("gecko_run", &gecko::gecko_run, py::arg("spec"), py::arg("pulse"),
        py::arg("target"), py::arg("quality"), py::arg("cfg"),
        py::arg("restorer") = gecko::RestoreConfig{},
        "Optimize the quality along the fidelity level set");
  m.def("refine_and_smooth", &gecko::refine_and_smooth, py::arg("spec"),
        py::arg("pulse"), py::arg("target"), py::arg("rounds"), py::arg("cfg"),
        py::arg("restorer") = gecko::RestoreConfig{},
        "Double the segment count and smooth, `rounds` times");

  // ---- pulse files ---------------------------------------------------------------
  py::class_<gecko::PulseMetadata>(m, "PulseMetadata")
      .def(py::init<>())
      .def_readwrite("fidelity", &gecko::PulseMetadata::fidelity)
      .def_readwrite("quality_name", &gecko::PulseMetadata::quality_name)
      .def_readwrite("quality_value", &gecko::PulseMetadata::quality_value)
      .def_readwrite("seed", &gecko::PulseMetadata::seed)
      .def_readwrite("tool_version", &gecko::PulseMetadata::tool_version);

  py::class_<gecko::PulseFile>(m, "PulseFile")
      .def(py::init([](const gecko::HamiltonianSpec& spec,
                       const gecko::PulseParams& pulse,
                       const gecko::GateTarget& target,
                       const gecko::PulseMetadata& metadata) {
             return gecko::PulseFile{spec, pulse, target, metadata};
           }),
           py::arg("spec"), py::arg("pulse"), py::arg("target"),
           py::arg("metadata") = gecko::PulseMetadata{})
      .def_readwrite("spec", &gecko::PulseFile::spec)
      .def_readwrite("pulse", &gecko::PulseFile::pulse)
      .def_readwrite("target", &gecko::PulseFile::target)
      .def_readwrite("metadata", &gecko::PulseFile::metadata);

  m.def("pulse_to_json", &gecko::pulse_to_json, py::arg("file"));
  m.def("pulse_from_json", &gecko::pulse_from_json, py::arg("text"));
  m.def("save_pulse", &gecko::save_pulse, py::arg("path"), py::arg("file"));
  m.def("load_pulse", &gecko::load_pulse, py::arg("path"));
}
