#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gecko {

/// Dense n-qubit Pauli string. The label is a string over {I, X, Y, Z};
/// qubit 1 is the leftmost factor of the Kronecker product, so "XI" acts
/// with X on qubit 1 and the identity on qubit 2.
class PauliString {
 public:
  explicit PauliString(std::string label);

  const std::string& label() const { return label_; }
  int qubits() const { return static_cast<int>(label_.size()); }
  int dim() const { return 1 << qubits(); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

 private:
  std::string label_;
  Eigen::MatrixXcd matrix_;
};

/// Builds the dense operator for a Pauli label such as "ZZ" or "XIY".
/// Throws InputError for an empty label, an invalid character, or more
/// than 10 qubits.
PauliString pauli_operator(const std::string& label);

/// All 4^n - 1 non-identity Pauli strings on n qubits, in lexicographic
/// label order with I < X < Y < Z. This ordering defines the coordinate
/// layout of algebra_project and the rows of pulse Jacobians, and is part
/// of the on-disk file contract; never reorder it. The returned reference
/// stays valid for the lifetime of the process.
const std::vector<PauliString>& pauli_basis(int n);

/// Eigendecomposition of a Hermitian operator, kept so that a propagator
/// and its directional derivatives can reuse one factorization.
struct HermitianEigen {
  Eigen::VectorXd values;    // real eigenvalues, ascending
  Eigen::MatrixXcd vectors;  // unitary matrix of eigenvectors (columns)

  /// Factorizes h. Throws InputError if h is not square or not Hermitian
  /// (relative tolerance 1e-12 on the largest entry), NumericalError if
  /// the eigensolver fails.
  static HermitianEigen factorize(const Eigen::MatrixXcd& h);

  /// exp(-i h t) assembled from the stored factorization.
  Eigen::MatrixXcd unitary(double t) const;

  /// Directional derivative (d/de) exp(-i (h + e v) t) at e = 0 for a
  /// Hermitian direction v, via the divided-difference kernel in the
  /// eigenbasis. Eigenvalue pairs closer than 1e-12 * max(1, |lambda_a|)
  /// use the confluent limit -i t e^{-i lambda_a t}.
  Eigen::MatrixXcd directional_derivative(const Eigen::MatrixXcd& v,
                                          double t) const;
};

/// exp(-i h t) for a Hermitian matrix h.
Eigen::MatrixXcd hermitian_expm(const Eigen::MatrixXcd& h, double t);

/// Directional derivative of hermitian_expm(h, t) along a Hermitian v.
Eigen::MatrixXcd expm_directional_derivative(const Eigen::MatrixXcd& h,
                                             const Eigen::MatrixXcd& v,
                                             double t);

/// Coordinates of an anti-Hermitian omega in the Pauli basis: writes
/// i*omega = a_0 I + sum_j a_j G_j and returns (a_1, ..., a_{N^2-1})
/// over pauli_basis(n), dropping the identity coefficient a_0. The
/// coefficients are a_j = Re tr(G_j * i*omega) / N. Throws InputError
/// if omega is not anti-Hermitian within a relative tolerance of 1e-8
/// or its dimension is not a power of two.
Eigen::VectorXd algebra_project(const Eigen::MatrixXcd& omega);

/// Hilbert-Schmidt inner product Re tr(x^dagger y) / N. Under this metric
/// the Pauli strings are orthonormal.
double hs_metric(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y);

}  // namespace gecko
