#pragma once

#include <string>
#include <vector>

#include "anex/dense.hpp"
#include "anex/encoding.hpp"
#include "anex/model.hpp"

namespace anex {

struct StateVector {
  int n_qubits = 0;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

inline StateVector basis_state(int n_qubits, int index) {
  if (n_qubits < 1 || n_qubits > 30)
    throw DimensionError("qubit count out of range for dense states");
  const long dim = 1L << n_qubits;
  if (index < 0 || index >= dim)
    throw DimensionError("basis index " + std::to_string(index) +
                         " outside [0, " + std::to_string(dim) + ")");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amplitudes = Eigen::VectorXcd::Zero(dim);
  s.amplitudes(index) = 1.0;
  return s;
}

/// |<a|b>|^2.
inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits)
    throw DimensionError("states live on different registers");
  return std::norm(a.amplitudes.dot(b.amplitudes));
}

/// Weight of the state outside the code space: 1 - <psi|P|psi>.
inline double leakage(const StateVector& state, const Encoding& enc) {
  if (state.n_qubits != enc.n_qubits)
    throw DimensionError("state and encoding dimensions differ");
  return 1.0 - (enc.isometry.adjoint() * state.amplitudes).squaredNorm();
}

/// Applies the schedule's piecewise-constant segments to the state:
/// each segment contributes exp(-i H(assignments) duration).
inline StateVector run_schedule(const HamiltonianSpec& spec,
                                const ControlSchedule& schedule,
                                const StateVector& initial,
                                int dense_cap = kDefaultDenseCap) {
  if (initial.n_qubits != spec.n_qubits)
    throw DimensionError("initial state is on " + std::to_string(initial.n_qubits) +
                         " qubits, device has " + std::to_string(spec.n_qubits));
  check_dense_cap(spec.n_qubits, dense_cap);
  validate_schedule(spec, schedule);
  StateVector state = initial;
  for (const auto& seg : schedule.segments) {
    const auto h = build_operator(spec, seg.assignments);
    state.amplitudes =
        (expm_hermitian(to_matrix(h, dense_cap), seg.duration) * state.amplitudes)
            .eval();
    if (std::abs(state.norm() - initial.norm()) > 1e-10)
      throw ContractError("segment evolution failed to preserve the norm");
  }
  return state;
}

struct GroundState {
  double energy = 0.0;
  StateVector state;            // first basis vector of the ground space
  int degeneracy = 1;
  Eigen::MatrixXcd basis;       // orthonormal columns spanning the ground space
};

/// Lowest eigenpair of H; eigenvalues within 1e-9 of the bottom count as
/// degenerate and their eigenvectors are all reported.
inline GroundState ground_state(const OperatorSum& h,
                                int dense_cap = kDefaultDenseCap) {
  const Eigen::MatrixXcd m = to_matrix(h, dense_cap);
  if (!m.isApprox(m.adjoint(), 1e-9))
    throw ContractError("ground_state requires a Hermitian operator");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  const auto& vals = solver.eigenvalues();
  GroundState g;
  g.energy = vals(0);
  int d = 1;
  while (d < vals.size() && vals(d) - vals(0) <= 1e-9) ++d;
  g.degeneracy = d;
  g.basis = solver.eigenvectors().leftCols(d);
  g.state.n_qubits = h.n_qubits();
  g.state.amplitudes = g.basis.col(0);
  return g;
}

enum class PairOutcome { Singlet, Triplet };

inline const char* outcome_name(PairOutcome o) {
  return o == PairOutcome::Singlet ? "singlet" : "triplet";
}

struct MeasurementRecord {
  int pair = 0;
  PairOutcome outcome = PairOutcome::Singlet;
  double probability = 0.0;
  StateVector post_state;
};

/// Projective readout on pair m distinguishing the antisymmetric pair state
/// (single-occupation code: (|01>-|10>)/sqrt2; equal-occupation code:
/// (|00>-|11>)/sqrt2) from its orthocomplement. Outcomes with probability
/// at or below 1e-12 are omitted.
inline std::vector<MeasurementRecord> measure_pair(const StateVector& state,
                                                   int m, const Encoding& enc) {
  if (state.n_qubits != enc.n_qubits)
    throw DimensionError("state and encoding dimensions differ");
  enc.check_pair(m);
  const int n = enc.n_qubits;
  const int dim = 1 << n;
  // Bit positions of the pair's sites (site 1 is most significant).
  const int shift_a = n - (2 * m - 1);
  const int shift_b = n - 2 * m;
  const int bits_hi = enc.kind == CodeKind::SingleOccupation
                          ? (0 << shift_a) | (1 << shift_b)   // |01>
                          : (0 << shift_a) | (0 << shift_b);  // |00>
  const int bits_lo = enc.kind == CodeKind::SingleOccupation
                          ? (1 << shift_a) | (0 << shift_b)   // |10>
                          : (1 << shift_a) | (1 << shift_b);  // |11>
  const int pair_mask = (1 << shift_a) | (1 << shift_b);

  // Amplitude of the antisymmetric combination in each environment sector.
  Eigen::VectorXcd singlet_part = Eigen::VectorXcd::Zero(dim);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int idx = 0; idx < dim; ++idx) {
    if ((idx & pair_mask) != bits_hi) continue;
    const int partner = (idx & ~pair_mask) | bits_lo;
    const auto amp = inv_sqrt2 * (state.amplitudes(idx) - state.amplitudes(partner));
    // Distribute the singlet weight back onto the two basis states.
    singlet_part(idx) += amp * inv_sqrt2;
    singlet_part(partner) -= amp * inv_sqrt2;
  }
  std::vector<MeasurementRecord> records;
  const double p_singlet = singlet_part.squaredNorm();
  if (p_singlet > 1e-12) {
    MeasurementRecord rec;
    rec.pair = m;
    rec.outcome = PairOutcome::Singlet;
    rec.probability = p_singlet;
    rec.post_state = {n, singlet_part / std::sqrt(p_singlet)};
    records.push_back(std::move(rec));
  }
  const Eigen::VectorXcd triplet_part = state.amplitudes - singlet_part;
  const double p_triplet = triplet_part.squaredNorm();
  if (p_triplet > 1e-12) {
    MeasurementRecord rec;
    rec.pair = m;
    rec.outcome = PairOutcome::Triplet;
    rec.probability = p_triplet;
    rec.post_state = {n, triplet_part / std::sqrt(p_triplet)};
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace anex
