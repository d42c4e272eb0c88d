#include "gecko/operator_core.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include "gecko/errors.hpp"

namespace gecko {

namespace {

constexpr int kMaxQubits = 10;

using Complex = std::complex<double>;

const Eigen::Matrix2cd& single_qubit_pauli(char c) {
  static const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  static const Eigen::Matrix2cd x = (Eigen::Matrix2cd() << 0, 1,  //
                                     1, 0)
                                        .finished();
  static const Eigen::Matrix2cd y =
      (Eigen::Matrix2cd() << 0, Complex(0, -1),  //
       Complex(0, 1), 0)
          .finished();
  static const Eigen::Matrix2cd z = (Eigen::Matrix2cd() << 1, 0,  //
                                     0, -1)
                                        .finished();
  switch (c) {
    case 'I':
      return id;
    case 'X':
      return x;
    case 'Y':
      return y;
    case 'Z':
      return z;
    default:
      throw InputError(std::string("invalid Pauli character '") + c +
                       "'; expected one of I, X, Y, Z");
  }
}

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void check_square(const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw InputError(std::string(what) + ": expected a nonempty square matrix");
}

// Number of qubits for dimension N = 2^n; throws if N is not a power of two.
int qubits_for_dim(Eigen::Index dim, const char* what) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim && n <= kMaxQubits) {
    d <<= 1;
    ++n;
  }
  if (d != dim || n == 0 || n > kMaxQubits)
    throw InputError(std::string(what) +
                     ": dimension must be 2^n with 1 <= n <= 10");
  return n;
}

}  // namespace

PauliString::PauliString(std::string label) : label_(std::move(label)) {
  if (label_.empty()) throw InputError("Pauli label must name at least one qubit");
  if (label_.size() > kMaxQubits)
    throw InputError("Pauli label exceeds the supported maximum of 10 qubits");
  matrix_ = Eigen::MatrixXcd::Ones(1, 1);
  for (char c : label_) {
    const Eigen::Matrix2cd& p = single_qubit_pauli(c);
    Eigen::MatrixXcd next(matrix_.rows() * 2, matrix_.cols() * 2);
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i)
      for (Eigen::Index j = 0; j < matrix_.cols(); ++j)
        next.block<2, 2>(2 * i, 2 * j) = matrix_(i, j) * p;
    matrix_ = std::move(next);
  }
}

PauliString pauli_operator(const std::string& label) { return PauliString(label); }

const std::vector<PauliString>& pauli_basis(int n) {
  if (n < 1 || n > kMaxQubits)
    throw InputError("pauli_basis: qubit count must be between 1 and 10");
  static std::mutex mutex;
  static std::map<int, std::vector<PauliString>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Enumerate labels as base-4 digits with I=0 < X=1 < Y=2 < Z=3; the
  // numeric order of the index equals lexicographic order of the label.
  static const char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  std::vector<PauliString> basis;
  const std::size_t count = (std::size_t(1) << (2 * n)) - 1;
  basis.reserve(count);
  for (std::size_t idx = 1; idx <= count; ++idx) {
    std::string label(static_cast<std::size_t>(n), 'I');
    std::size_t rem = idx;
    for (int q = n - 1; q >= 0; --q) {
      label[static_cast<std::size_t>(q)] = kLetters[rem & 3];
      rem >>= 2;
    }
    basis.emplace_back(label);
  }
  return cache.emplace(n, std::move(basis)).first->second;
}

HermitianEigen HermitianEigen::factorize(const Eigen::MatrixXcd& h) {
  check_square(h, "hermitian factorization");
  const double scale = max_abs(h);
  if (max_abs(h - h.adjoint()) > 1e-12 * scale)
    throw InputError("hermitian factorization: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalError("hermitian factorization: eigensolver failed");
  return HermitianEigen{solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXcd HermitianEigen::unitary(double t) const {
  const Eigen::Index n = values.size();
  Eigen::VectorXcd phases(n);
  for (Eigen::Index a = 0; a < n; ++a)
    phases(a) = std::exp(Complex(0, -values(a) * t));
  return vectors * phases.asDiagonal() * vectors.adjoint();
}

Eigen::MatrixXcd HermitianEigen::directional_derivative(
    const Eigen::MatrixXcd& v, double t) const {
  const Eigen::Index n = values.size();
  if (v.rows() != n || v.cols() != n)
    throw InputError("directional derivative: dimension mismatch");
  const double scale = max_abs(v);
  if (max_abs(v - v.adjoint()) > 1e-12 * scale)
    throw InputError("directional derivative: direction is not Hermitian");

  Eigen::VectorXcd phases(n);
  for (Eigen::Index a = 0; a < n; ++a)
    phases(a) = std::exp(Complex(0, -values(a) * t));

  // Divided differences of f(x) = exp(-i x t) between eigenvalue pairs,
  // with the confluent limit f'(lambda_a) on (near-)degenerate pairs.
  Eigen::MatrixXcd w = vectors.adjoint() * v * vectors;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double gap = values(a) - values(b);
      Complex kernel;
      if (std::abs(gap) < 1e-12 * std::max(1.0, std::abs(values(a))))
        kernel = Complex(0, -t) * phases(a);
      else
        kernel = (phases(a) - phases(b)) / gap;
      w(a, b) *= kernel;
    }
  }
  return vectors * w * vectors.adjoint();
}

Eigen::MatrixXcd hermitian_expm(const Eigen::MatrixXcd& h, double t) {
  return HermitianEigen::factorize(h).unitary(t);
}

Eigen::MatrixXcd expm_directional_derivative(const Eigen::MatrixXcd& h,
                                             const Eigen::MatrixXcd& v,
                                             double t) {
  return HermitianEigen::factorize(h).directional_derivative(v, t);
}

Eigen::VectorXd algebra_project(const Eigen::MatrixXcd& omega) {
  check_square(omega, "algebra_project");
  const int n = qubits_for_dim(omega.rows(), "algebra_project");
  const double scale = max_abs(omega);
  if (max_abs(omega + omega.adjoint()) > 1e-8 * scale)
    throw InputError("algebra_project: matrix is not anti-Hermitian");

  const Eigen::MatrixXcd m = Complex(0, 1) * omega;  // Hermitian
  const auto& basis = pauli_basis(n);
  const double inv_dim = 1.0 / static_cast<double>(omega.rows());
  Eigen::VectorXd coords(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    // tr(G_j m) = sum_{p,q} G_j(p,q) m(q,p)
    const Complex tr =
        basis[j].matrix().cwiseProduct(m.transpose()).sum();
    coords(static_cast<Eigen::Index>(j)) = tr.real() * inv_dim;
  }
  return coords;
}

double hs_metric(const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
  check_square(x, "hs_metric");
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw InputError("hs_metric: dimension mismatch");
  const Complex tr = (x.adjoint() * y).trace();
  return tr.real() / static_cast<double>(x.rows());
}

}  // namespace gecko
