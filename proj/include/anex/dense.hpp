#pragma once

#include <Eigen/Dense>
#include <complex>

#include "anex/operator_sum.hpp"

namespace anex {

/// Default cap on dense-matrix qubit counts (2^12 x 2^12 at most).
inline constexpr int kDefaultDenseCap = 12;

inline void check_dense_cap(int n_qubits, int dense_cap) {
  if (n_qubits > dense_cap)
    throw ResourceError("dense representation of " + std::to_string(n_qubits) +
                        " qubits exceeds cap of " + std::to_string(dense_cap));
}

/// Dense matrix in the computational basis. Site 1 is the most significant
/// bit of the basis index, so on one qubit Z1 = diag(+1, -1) with |0> first.
inline Eigen::MatrixXcd to_matrix(const OperatorSum& a,
                                  int dense_cap = kDefaultDenseCap) {
  check_dense_cap(a.n_qubits(), dense_cap);
  const int n = a.n_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  static constexpr std::complex<double> kQuartic[4] = {
      {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& [word, coeff] : a.terms()) {
    // Map site s to index bit (n - s): site 1 most significant.
    std::uint64_t flip = 0;
    std::vector<std::pair<std::uint64_t, int>> phase_bits;  // (bit, base exp)
    for (int s = 1; s <= n; ++s) {
      const Pauli p = word.at(s);
      if (p == Pauli::I) continue;
      const std::uint64_t b = std::uint64_t{1} << (n - s);
      // Column value v at this bit contributes: X: 1; Z: (-1)^v; Y: i*(-1)^v.
      if (p == Pauli::X || p == Pauli::Y) flip |= b;
      if (p == Pauli::Y) phase_bits.emplace_back(b, 1);
      if (p == Pauli::Z) phase_bits.emplace_back(b, 0);
    }
    for (Eigen::Index col = 0; col < dim; ++col) {
      int e = 0;
      for (const auto& [b, base] : phase_bits)
        e += base + ((static_cast<std::uint64_t>(col) & b) ? 2 : 0);
      const Eigen::Index row =
          static_cast<Eigen::Index>(static_cast<std::uint64_t>(col) ^ flip);
      m(row, col) += coeff * kQuartic[e & 3];
    }
  }
  return m;
}

/// e^{-i H t} for Hermitian H, via eigendecomposition (exact to solver
/// precision for any t).
inline Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double t) {
  if (h.rows() != h.cols()) throw DimensionError("expm requires a square matrix");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw ContractError("expm_hermitian requires a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd& w = es.eigenvalues();
  Eigen::VectorXcd ph(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    ph(k) = std::exp(std::complex<double>(0, -w(k) * t));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

/// e^{-i A t} for a Hermitian operator sum.
inline Eigen::MatrixXcd exact_unitary(const OperatorSum& a, double t,
                                      int dense_cap = kDefaultDenseCap) {
  if (!a.is_hermitian())
    throw ContractError("exact_unitary requires a Hermitian operator");
  return expm_hermitian(to_matrix(a, dense_cap), t);
}

/// Largest singular value.
inline double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

inline bool nearly_unitary(const Eigen::MatrixXcd& u, double tol = 1e-10) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

/// |tr(U† V) / d|^2, the phase-insensitive overlap of two same-shaped
/// unitaries.
inline double trace_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols())
    throw DimensionError("trace_fidelity requires matching shapes");
  const std::complex<double> tr = (u.adjoint() * v).trace();
  const double d = static_cast<double>(u.cols());
  return std::norm(tr / d);
}

}  // namespace anex
