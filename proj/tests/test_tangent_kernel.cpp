#include "gecko/tangent_kernel.hpp"

#include <doctest.h>

#include <random>

#include "gecko/errors.hpp"
#include "support/oracles.hpp"

using namespace gecko;

namespace {

PulseParams random_test_pulse(int segments, int channels, std::mt19937_64& rng,
                              double dt = 1.0, bool optimize_dt = false) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  PulseParams p;
  p.phi.resize(segments, channels);
  for (Eigen::Index l = 0; l < p.phi.rows(); ++l)
    for (Eigen::Index k = 0; k < p.phi.cols(); ++k) p.phi(l, k) = dist(rng);
  p.dt = dt;
  p.optimize_dt = optimize_dt;
  return p;
}

/// Finite-difference column: perturb one flattened parameter of the pulse,
/// differentiate U_G centrally, left-translate by the unperturbed U_G, and
/// project onto the Pauli basis.
Eigen::VectorXd fd_column(const HamiltonianSpec& spec, const PulseParams& pulse,
                          Eigen::Index param, double h) {
  const auto shifted = [&](double eps) {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(parameter_count(pulse));
    delta(param) = eps;
    return pulse_unitary(spec, apply_parameter_delta(pulse, delta));
  };
  const Eigen::MatrixXcd derivative = (shifted(h) - shifted(-h)) / (2.0 * h);
  const Eigen::MatrixXcd u_gate = pulse_unitary(spec, pulse);
  return algebra_project(u_gate.adjoint() * derivative);
}

}  // namespace

TEST_CASE("parameter flattening") {
  std::mt19937_64 rng(2);
  auto p = random_test_pulse(3, 2, rng, 0.5);

  SUBCASE("layout is segment-major with dt last") {
    CHECK(parameter_count(p) == 6);
    const Eigen::VectorXd flat = flatten_parameters(p);
    CHECK(flat(0) == p.phi(0, 0));
    CHECK(flat(1) == p.phi(0, 1));
    CHECK(flat(4) == p.phi(2, 0));
    p.optimize_dt = true;
    CHECK(parameter_count(p) == 7);
    CHECK(flatten_parameters(p)(6) == 0.5);
  }

  SUBCASE("apply_parameter_delta inverts flattening") {
    Eigen::VectorXd delta(6);
    delta << 1, 2, 3, 4, 5, 6;
    const auto moved = apply_parameter_delta(p, delta);
    CHECK((flatten_parameters(moved) - flatten_parameters(p) - delta)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SUBCASE("dt is clamped to stay positive") {
    p.optimize_dt = true;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(7);
    delta(6) = -0.5;  // would land exactly on dt = 0
    CHECK_THROWS_AS(apply_parameter_delta(p, delta), StepRejectedError);
    delta(6) = -0.4999;
    CHECK(apply_parameter_delta(p, delta).dt == doctest::Approx(1e-4));
  }

  SUBCASE("size mismatch is rejected") {
    CHECK_THROWS_AS(apply_parameter_delta(p, Eigen::VectorXd::Zero(5)),
                    InputError);
  }
}

TEST_CASE("pulse_jacobian") {
  SUBCASE("single commuting segment gives +dt along the control axis") {
    // H = phi * XI with no drift: U = exp(-i phi XI dt), so the
    // left-translated derivative is -i dt XI and its projection is dt at
    // the XI slot of the two-qubit basis (index 3).
    const HamiltonianSpec spec(
        2, {}, {ControlChannel({{pauli_operator("XI"), 1.0}})});
    PulseParams p;
    p.phi.resize(1, 1);
    p.phi << 0.37;
    p.dt = 0.8;
    const auto jac = pulse_jacobian(spec, p);
    REQUIRE(jac.entries.cols() == 1);
    REQUIRE(jac.entries.rows() == 15);
    CHECK(jac.entries(3, 0) == doctest::Approx(0.8).epsilon(1e-12));
    for (Eigen::Index r = 0; r < 15; ++r)
      if (r != 3) CHECK(std::abs(jac.entries(r, 0)) < 1e-13);
  }

  SUBCASE("column count and layout flags") {
    std::mt19937_64 rng(3);
    const auto spec = model_preset("tfim1_h2zero");
    auto p = random_test_pulse(20, 1, rng);
    CHECK(pulse_jacobian(spec, p).entries.cols() == 20);
    p.optimize_dt = true;
    const auto jac = pulse_jacobian(spec, p);
    CHECK(jac.entries.cols() == 21);
    CHECK(jac.has_dt_column);
    CHECK(jac.segments == 20);
    CHECK(jac.channels == 1);
  }

  SUBCASE("all columns match finite differences on every preset") {
    std::mt19937_64 rng(7);
    for (const char* name : {"tfim1", "tfim1_h2zero", "tfim2"}) {
      const auto spec = model_preset(name);
      for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_test_pulse(3 + trial % 3, spec.channels(), rng,
                                         0.9, trial % 2 == 1);
        const auto jac = pulse_jacobian(spec, p);
        for (Eigen::Index j = 0; j < jac.entries.cols(); ++j) {
          const Eigen::VectorXd fd = fd_column(spec, p, j, 1e-6);
          CHECK(oracle::rel_error_vec(jac.entries.col(j), fd) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("kernel_basis") {
  SUBCASE("zero Jacobian makes every direction kernel") {
    JacobianMatrix jac;
    jac.entries = Eigen::MatrixXd::Zero(15, 6);
    jac.segments = 6;
    jac.channels = 1;
    const auto kernel = kernel_basis(jac);
    CHECK(kernel.rank == 0);
    CHECK(kernel.dimension() == 6);
    CHECK(oracle::rel_error(
              Eigen::MatrixXcd(kernel.basis.cast<std::complex<double>>()),
              Eigen::MatrixXcd::Identity(6, 6)) == 0.0);
  }

  SUBCASE("random single-control pulses have a large kernel") {
    // The drift ZZ and single control XI only generate a 3-dimensional
    // algebra (XI, YZ, ZZ), so the Jacobian rank is at most 3 everywhere.
    std::mt19937_64 rng(11);
    const auto spec = model_preset("tfim1_h2zero");
    for (int trial = 0; trial < 5; ++trial) {
      const auto p = random_test_pulse(8, 1, rng);
      const auto jac = pulse_jacobian(spec, p);
      const auto kernel = kernel_basis(jac);
      CHECK(kernel.rank <= 3);
      CHECK(kernel.dimension() >= 5);
      CHECK(kernel.rank + kernel.dimension() == 8);
      CHECK(kernel.singular_values.size() == 8);  // min(15, 8)
      // Orthonormal columns and a genuine nullspace.
      const Eigen::MatrixXd gram = kernel.basis.transpose() * kernel.basis;
      CHECK((gram - Eigen::MatrixXd::Identity(kernel.dimension(),
                                              kernel.dimension()))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
      CHECK((jac.entries * kernel.basis).cwiseAbs().maxCoeff() <
            10.0 * kernel.tolerance);
    }
  }

  SUBCASE("two independent controls reach a 6-dimensional algebra") {
    std::mt19937_64 rng(13);
    const auto spec = model_preset("tfim1");
    const auto p = random_test_pulse(8, 2, rng);
    const auto kernel = kernel_basis(pulse_jacobian(spec, p));
    CHECK(kernel.rank <= 6);
    CHECK(kernel.dimension() >= 10);
  }

  SUBCASE("non-finite Jacobian is rejected") {
    JacobianMatrix jac;
    jac.entries = Eigen::MatrixXd::Zero(15, 4);
    jac.entries(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(kernel_basis(jac), InputError);
  }
}

TEST_CASE("project_gradient") {
  std::mt19937_64 rng(17);
  const auto spec = model_preset("tfim1_h2zero");
  const auto p = random_test_pulse(8, 1, rng);
  const auto kernel = kernel_basis(pulse_jacobian(spec, p));
  REQUIRE(kernel.dimension() >= 5);

  SUBCASE("zero gradient maps to zero") {
    CHECK(project_gradient(kernel, Eigen::VectorXd::Zero(8)).norm() == 0.0);
  }

  SUBCASE("a gradient inside the kernel is recovered exactly") {
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(kernel.dimension(), -1, 1);
    const Eigen::VectorXd dx = project_gradient(kernel, kernel.basis * v);
    CHECK((dx + v).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("matches the least-squares oracle") {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd g(8);
    for (Eigen::Index i = 0; i < 8; ++i) g(i) = dist(rng);
    const Eigen::VectorXd dx = project_gradient(kernel, g);
    const Eigen::VectorXd want = oracle::lstsq_pinv(kernel.basis, -g);
    CHECK(oracle::rel_error_vec(dx, want) < 1e-10);
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(project_gradient(kernel, Eigen::VectorXd::Zero(9)),
                    InputError);
  }
}

TEST_CASE("take_step") {
  std::mt19937_64 rng(19);
  const auto spec = model_preset("tfim1_h2zero");
  const auto target = gate_target("CZ");
  const auto p = random_test_pulse(8, 1, rng);
  const auto kernel = kernel_basis(pulse_jacobian(spec, p));
  REQUIRE(kernel.dimension() >= 5);

  SUBCASE("the update has exactly the requested norm") {
    Eigen::VectorXd dx = Eigen::VectorXd::LinSpaced(kernel.dimension(), 1, 2);
    for (double s : {1e-1, 1e-3}) {
      const auto result = take_step(spec, p, target, kernel, dx, s);
      const double moved =
          (flatten_parameters(result.pulse) - flatten_parameters(p)).norm();
      CHECK(std::abs(moved - s) < 1e-12);
      CHECK(result.step_norm == s);
    }
  }

  SUBCASE("predicted quality change is the gradient inner product") {
    Eigen::VectorXd grad = Eigen::VectorXd::LinSpaced(8, -1, 1);
    const Eigen::VectorXd dx = project_gradient(kernel, grad);
    const auto result = take_step(spec, p, target, kernel, dx, 0.01, &grad);
    // Moving along -Z Z^T grad must not predict an increase.
    CHECK(result.predicted_dq <= 0.0);
  }

  SUBCASE("zero direction raises DegenerateStepError") {
    CHECK_THROWS_AS(take_step(spec, p, target, kernel,
                              Eigen::VectorXd::Zero(kernel.dimension()), 0.1),
                    DegenerateStepError);
  }

  SUBCASE("a step through dt <= 0 raises StepRejectedError") {
    JacobianMatrix jac;
    jac.entries = Eigen::MatrixXd::Zero(15, 5);  // 4 amplitudes + dt
    jac.segments = 4;
    jac.channels = 1;
    jac.has_dt_column = true;
    const auto identity_kernel = kernel_basis(jac);
    auto q = random_test_pulse(4, 1, rng, 0.5, true);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(5);
    dx(4) = -1.0;
    CHECK_THROWS_AS(take_step(spec, q, target, identity_kernel, dx, 1.0),
                    StepRejectedError);
  }

  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(
        take_step(spec, p, target, kernel, Eigen::VectorXd::Zero(2), 0.1),
        InputError);
  }
}

TEST_CASE("kernel steps preserve the unitary to first order") {
  std::mt19937_64 rng(23);
  const auto spec = model_preset("tfim1_h2zero");
  const auto p = random_test_pulse(8, 1, rng);
  const auto jac = pulse_jacobian(spec, p);
  const auto kernel = kernel_basis(jac);
  REQUIRE(kernel.dimension() >= 5);
  const Eigen::MatrixXcd u0 = pulse_unitary(spec, p);

  const auto unitary_change = [&](const Eigen::VectorXd& direction, double s) {
    const auto moved = apply_parameter_delta(p, s * direction);
    return (pulse_unitary(spec, moved) - u0).cwiseAbs().maxCoeff();
  };

  SUBCASE("kernel directions: quadratic scaling") {
    const Eigen::VectorXd z = kernel.basis.col(0);
    const double big = unitary_change(z, 1e-2);
    const double small = unitary_change(z, 1e-3);
    // Slope 2 means the change shrinks ~100x per decade of s.
    CHECK(big / small > 30.0);
    CHECK(big < 1e-3);  // already second order at s = 1e-2
  }

  SUBCASE("row-space directions: linear scaling") {
    // The top right-singular vector is maximally non-kernel.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(jac.entries, Eigen::ComputeFullV);
    const Eigen::VectorXd v = svd.matrixV().col(0);
    const double big = unitary_change(v, 1e-2);
    const double small = unitary_change(v, 1e-3);
    CHECK(big / small < 30.0);  // slope ~1: only ~10x per decade
    CHECK(big / small > 3.0);
  }
}
