#pragma once

#include <string>
#include <vector>

#include "anex/closure.hpp"
#include "anex/dense.hpp"
#include "anex/operator_sum.hpp"

namespace anex {

/// Two-site codes, one logical qubit per physical pair (2m-1, 2m):
///   SingleOccupation: |0_L> = |01>, |1_L> = |10>  (one excitation per pair)
///   EqualOccupation:  |0_L> = |00>, |1_L> = |11>  (even parity per pair)
enum class CodeKind { SingleOccupation, EqualOccupation };

inline const char* code_name(CodeKind k) {
  return k == CodeKind::SingleOccupation ? "single-occupation"
                                         : "equal-occupation";
}

struct Encoding {
  CodeKind kind = CodeKind::SingleOccupation;
  int n_pairs = 0;
  int n_qubits = 0;                // 2 * n_pairs
  std::vector<int> codewords;      // physical basis index per logical index
  Eigen::MatrixXcd isometry;       // 2^n x 2^m, columns are code words
  Eigen::MatrixXcd projector;      // isometry * isometry^dagger

  int pair_site_a(int m) const { return 2 * m - 1; }
  int pair_site_b(int m) const { return 2 * m; }

  /// Pair-level generators. On the code space these act as the logical
  /// X, Y, Z up to fixed scales: X_L, 2 Y_L, 2 Z_L.
  OperatorSum logical_x(int m) const {
    check_pair(m);
    OperatorSum g(n_qubits);
    const double sign = kind == CodeKind::SingleOccupation ? 0.5 : -0.5;
    g.add(PauliString(n_qubits).with(pair_site_a(m), Pauli::X).with(pair_site_b(m), Pauli::X),
          0.5);
    g.add(PauliString(n_qubits).with(pair_site_a(m), Pauli::Y).with(pair_site_b(m), Pauli::Y),
          sign);
    return g;
  }
  OperatorSum logical_z(int m) const {
    check_pair(m);
    OperatorSum g(n_qubits);
    const double sign = kind == CodeKind::SingleOccupation ? -1.0 : 1.0;
    g.add(PauliString(n_qubits).with(pair_site_a(m), Pauli::Z), 1.0);
    g.add(PauliString(n_qubits).with(pair_site_b(m), Pauli::Z), sign);
    return g;
  }
  OperatorSum logical_y(int m) const {
    return 0.5 * bracket(logical_z(m), logical_x(m));
  }

  void check_pair(int m) const {
    if (m < 1 || m > n_pairs)
      throw DimensionError("pair index " + std::to_string(m) +
                           " outside [1, " + std::to_string(n_pairs) + "]");
  }
};

inline Encoding make_encoding(CodeKind kind, int n_pairs,
                              int dense_cap = kDefaultDenseCap) {
  if (n_pairs < 1) throw ContractError("need at least one pair");
  const int n = 2 * n_pairs;
  check_dense_cap(n, dense_cap);
  Encoding enc;
  enc.kind = kind;
  enc.n_pairs = n_pairs;
  enc.n_qubits = n;
  const int logical_dim = 1 << n_pairs;
  enc.codewords.resize(logical_dim);
  for (int l = 0; l < logical_dim; ++l) {
    int phys = 0;
    for (int m = 1; m <= n_pairs; ++m) {
      const int bit = (l >> (n_pairs - m)) & 1;
      int a, b;  // bits at sites 2m-1, 2m
      if (kind == CodeKind::SingleOccupation) {
        a = bit;
        b = 1 - bit;
      } else {
        a = bit;
        b = bit;
      }
      phys = (phys << 2) | (a << 1) | b;
    }
    enc.codewords[l] = phys;
  }
  const int dim = 1 << n;
  enc.isometry = Eigen::MatrixXcd::Zero(dim, logical_dim);
  for (int l = 0; l < logical_dim; ++l) enc.isometry(enc.codewords[l], l) = 1.0;
  enc.projector = enc.isometry * enc.isometry.adjoint();
  return enc;
}

/// Lifts a logical state to the physical register.
inline Eigen::VectorXcd encode_state(const Encoding& enc,
                                     const Eigen::VectorXcd& logical) {
  if (logical.size() != (1 << enc.n_pairs))
    throw DimensionError("logical state has dimension " +
                         std::to_string(logical.size()) + ", expected " +
                         std::to_string(1 << enc.n_pairs));
  return enc.isometry * logical;
}

/// Projects a physical state back to the logical register. The weight
/// outside the code space is the leakage; decoding rejects states that
/// leaked more than 1e-9 unless forced.
inline Eigen::VectorXcd decode_state(const Encoding& enc,
                                     const Eigen::VectorXcd& physical,
                                     bool force = false) {
  if (physical.size() != (1 << enc.n_qubits))
    throw DimensionError("physical state has dimension " +
                         std::to_string(physical.size()) + ", expected " +
                         std::to_string(1 << enc.n_qubits));
  const Eigen::VectorXcd logical = enc.isometry.adjoint() * physical;
  const double leakage = physical.squaredNorm() - logical.squaredNorm();
  if (!force && leakage > 1e-9)
    throw ContractError("state leaked out of the code space (weight " +
                        detail::format_double(leakage) + ")");
  return logical;
}

inline double leakage_of(const Encoding& enc, const Eigen::VectorXcd& physical) {
  return physical.squaredNorm() -
         (enc.isometry.adjoint() * physical).squaredNorm();
}

/// The inter-pair Ising word and its action on the code space:
///   P (Z_{2m} Z_{2m+1}) P = scale * P Gz_m Gz_{m+1} P,
/// the building block of the encoded controlled-phase.
struct EntanglingAction {
  OperatorSum physical{2};  // the bare ZZ word on sites (2m, 2m+1)
  double scale = 0.0;       // engine-fitted proportionality
  double residual = 0.0;    // leftover after the fit (should be ~0)
};

inline EntanglingAction entangling_generator(const Encoding& enc, int m) {
  if (m < 1 || m >= enc.n_pairs)
    throw DimensionError("entangling pair index " + std::to_string(m) +
                         " outside [1, " + std::to_string(enc.n_pairs - 1) + "]");
  EntanglingAction act;
  act.physical = OperatorSum::term(
      PauliString(enc.n_qubits).with(2 * m, Pauli::Z).with(2 * m + 1, Pauli::Z), 1.0);
  const Eigen::MatrixXcd lhs =
      restrict_matrix(enc.isometry, act.physical);
  const Eigen::MatrixXcd rhs = restrict_matrix(
      enc.isometry,
      product(enc.logical_z(m), enc.logical_z(m + 1)));
  const double denom = rhs.squaredNorm();
  if (denom == 0.0) throw ContractError("logical ZZ restricts to zero");
  act.scale = (rhs.adjoint() * lhs).trace().real() / denom;
  act.residual = (lhs - act.scale * rhs).norm();
  if (act.residual > 1e-12)
    throw ContractError("inter-pair ZZ does not restrict to logical ZZ (residual " +
                        detail::format_double(act.residual) + ")");
  return act;
}

/// Dephasing environments the codes are screened against.
enum class BathKind { CollectiveDephasing, AntiCorrelatedDephasing };

inline const char* bath_name(BathKind b) {
  return b == BathKind::CollectiveDephasing ? "collective-dephasing"
                                            : "anti-correlated-dephasing";
}

struct DfsReport {
  BathKind bath = BathKind::CollectiveDephasing;
  OperatorSum coupling{2};     // the bath coupling operator S
  double action_norm = 0.0;    // ||S P||, zero iff S kills every code word
  bool annihilates_code = false;
  bool commutes_with_logic = false;  // S vs logical and entangling generators
  bool decoherence_free = false;     // both of the above
  std::string witness;
};

/// Checks whether the code space is a decoherence-free subspace for the
/// given dephasing model: the coupling S = sum of per-pair Z sums
/// (collective) or Z differences (anti-correlated) must annihilate the code
/// words and commute with every logical generator.
inline DfsReport dfs_check(const Encoding& enc, BathKind bath) {
  DfsReport rep;
  rep.bath = bath;
  OperatorSum s(enc.n_qubits);
  for (int m = 1; m <= enc.n_pairs; ++m) {
    const double sign = bath == BathKind::CollectiveDephasing ? 1.0 : -1.0;
    s.add(PauliString(enc.n_qubits).with(2 * m - 1, Pauli::Z), 1.0);
    s.add(PauliString(enc.n_qubits).with(2 * m, Pauli::Z), sign);
  }
  rep.coupling = s;
  rep.action_norm = (to_matrix(s) * enc.projector).norm();
  rep.annihilates_code = rep.action_norm == 0.0;

  bool commutes = true;
  for (int m = 1; m <= enc.n_pairs; ++m) {
    commutes = commutes && bracket(s, enc.logical_x(m)).is_zero() &&
               bracket(s, enc.logical_z(m)).is_zero();
  }
  for (int m = 1; m < enc.n_pairs; ++m) {
    const auto zz = OperatorSum::term(
        PauliString(enc.n_qubits).with(2 * m, Pauli::Z).with(2 * m + 1, Pauli::Z),
        1.0);
    commutes = commutes && bracket(s, zz).is_zero();
  }
  rep.commutes_with_logic = commutes;
  rep.decoherence_free = rep.annihilates_code && rep.commutes_with_logic;

  if (rep.decoherence_free) {
    rep.witness = std::string(bath_name(bath)) +
                  " coupling annihilates every code word and commutes with "
                  "the logical generators";
  } else if (!rep.annihilates_code) {
    rep.witness = std::string(bath_name(bath)) + " coupling acts on the " +
                  code_name(enc.kind) + " code words (norm " +
                  detail::format_double(rep.action_norm) + ")";
  } else {
    rep.witness = std::string(bath_name(bath)) +
                  " coupling fails to commute with the logical generators";
  }
  return rep;
}

}  // namespace anex
