#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "anex/closure.hpp"
#include "anex/encoding.hpp"
#include "anex/model.hpp"

namespace anex {

/// Outcome of a gate construction. `unitary` is the full-register matrix the
/// schedule realizes; fidelity and leakage are measured on the declared code
/// space, `relations` records the engine-verified conversion factors the
/// durations were derived from.
struct GateResult {
  Eigen::MatrixXcd unitary;
  ControlSchedule schedule;
  double fidelity_to_target = 0.0;
  double leakage = 0.0;
  int step_count = 0;
  bool converged = false;
  double error_norm = 0.0;
  std::map<std::string, double> relations;
};

// ---------------------------------------------------------------------------
// Schedule replay.
// ---------------------------------------------------------------------------

/// Composes the schedule into one unitary by exact exponentiation of each
/// segment's device Hamiltonian. Earlier segments act first.
inline Eigen::MatrixXcd schedule_unitary(const HamiltonianSpec& spec,
                                         const ControlSchedule& schedule,
                                         int dense_cap = kDefaultDenseCap) {
  validate_schedule(spec, schedule);
  const Eigen::Index dim = Eigen::Index{1} << spec.n_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& seg : schedule.segments) {
    const Eigen::MatrixXcd step =
        exact_unitary(build_operator(spec, seg.assignments), seg.duration, dense_cap);
    u = step * u;
  }
  return u;
}

/// Replay for schedules over abstract named generators (product-formula
/// output): each segment evolves under sum_name value * ops[name].
inline Eigen::MatrixXcd schedule_unitary(
    const std::map<std::string, OperatorSum>& ops, const ControlSchedule& schedule,
    int dense_cap = kDefaultDenseCap) {
  if (ops.empty()) throw ContractError("replay requires at least one generator");
  const int n = ops.begin()->second.n_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& seg : schedule.segments) {
    OperatorSum h(n);
    for (const auto& [name, value] : seg.assignments) {
      const auto it = ops.find(name);
      if (it == ops.end())
        throw ContractError("schedule references unknown generator '" + name + "'");
      h = h + value * it->second;
    }
    u = exact_unitary(h, seg.duration, dense_cap) * u;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Product formulas.
// ---------------------------------------------------------------------------

/// First-order product approximation of e^{i(alpha A + beta B)} with n
/// alternating steps. The reported error is the spectral-norm distance to
/// the exact exponential; it decays as 1/n for non-commuting A, B.
inline GateResult trotter_sum(const OperatorSum& a, const OperatorSum& b,
                              double alpha, double beta, int n,
                              int dense_cap = kDefaultDenseCap) {
  if (n < 1) throw ContractError("step count must be at least 1");
  if (a.n_qubits() != b.n_qubits())
    throw DimensionError("summands act on different registers");
  const Eigen::MatrixXcd exact =
      exact_unitary(alpha * a + beta * b, -1.0, dense_cap);
  const Eigen::MatrixXcd step_a = exact_unitary(a, -alpha / n, dense_cap);
  const Eigen::MatrixXcd step_b = exact_unitary(b, -beta / n, dense_cap);

  GateResult out;
  const Eigen::Index dim = step_a.rows();
  out.unitary = Eigen::MatrixXcd::Identity(dim, dim);
  for (int k = 0; k < n; ++k)
    out.unitary = Eigen::MatrixXcd(step_a * step_b * out.unitary);
  for (int k = 0; k < n; ++k) {
    out.schedule.segments.push_back({{{"B", -beta}}, 1.0 / n});
    out.schedule.segments.push_back({{{"A", -alpha}}, 1.0 / n});
  }
  out.step_count = n;
  out.converged = true;
  out.error_norm = spectral_norm(out.unitary - exact);
  out.fidelity_to_target = trace_fidelity(exact, out.unitary);
  return out;
}

/// Group-commutator approximation of e^{-[A,B]t} (the flow of the Hermitian
/// generator -i[A,B]) using n four-segment cycles with step angle sqrt(t/n).
inline GateResult group_commutator_gate(const OperatorSum& a, const OperatorSum& b,
                                        double t, int n,
                                        int dense_cap = kDefaultDenseCap) {
  if (n < 1) throw ContractError("step count must be at least 1");
  if (t < 0) throw ContractError("group commutator time must be non-negative");
  const Eigen::MatrixXcd target = exact_unitary(bracket(a, b), t, dense_cap);

  GateResult out;
  out.step_count = n;
  out.converged = true;
  if (t == 0.0) {
    out.unitary = Eigen::MatrixXcd::Identity(target.rows(), target.cols());
    out.fidelity_to_target = trace_fidelity(target, out.unitary);
    return out;
  }
  const double s = std::sqrt(t / n);
  const Eigen::MatrixXcd fwd_a = exact_unitary(a, -s, dense_cap);
  const Eigen::MatrixXcd fwd_b = exact_unitary(b, -s, dense_cap);
  const Eigen::MatrixXcd step =
      fwd_a * fwd_b * fwd_a.adjoint() * fwd_b.adjoint();
  out.unitary = Eigen::MatrixXcd::Identity(target.rows(), target.cols());
  for (int k = 0; k < n; ++k) out.unitary = Eigen::MatrixXcd(step * out.unitary);
  for (int k = 0; k < n; ++k) {
    out.schedule.segments.push_back({{{"B", 1.0}}, s});
    out.schedule.segments.push_back({{{"A", 1.0}}, s});
    out.schedule.segments.push_back({{{"B", -1.0}}, s});
    out.schedule.segments.push_back({{{"A", -1.0}}, s});
  }
  out.error_norm = spectral_norm(out.unitary - target);
  out.fidelity_to_target = trace_fidelity(target, out.unitary);
  return out;
}

// ---------------------------------------------------------------------------
// Encoded-gate plumbing.
// ---------------------------------------------------------------------------

namespace detail {

/// Assignment map pinning every controllable parameter to zero, skipping
/// raw/alias names whose simultaneous assignment would conflict.
inline std::map<std::string, double> zero_controls(const HamiltonianSpec& spec) {
  std::set<std::pair<int, int>> heis_bonds, alias_bonds;
  std::vector<ParamRef> refs;
  for (const auto& name : spec.controllable) {
    const ParamRef ref = validate_param_name(spec, name);
    refs.push_back(ref);
    if (ref.kind == ParamKind::AliasHeis) heis_bonds.insert({ref.i, ref.j});
    if (ref.kind == ParamKind::AliasJ || ref.kind == ParamKind::AliasD)
      alias_bonds.insert({ref.i, ref.j});
  }
  std::map<std::string, double> zeros;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const ParamRef& ref = refs[k];
    const std::pair<int, int> bond{ref.i, ref.j};
    switch (ref.kind) {
      case ParamKind::Jx:
      case ParamKind::Jy:
        if (heis_bonds.count(bond) || alias_bonds.count(bond)) continue;
        break;
      case ParamKind::Jz:
      case ParamKind::AliasJ:
      case ParamKind::AliasD:
        if (heis_bonds.count(bond)) continue;
        break;
      default:
        break;
    }
    zeros[spec.controllable[k]] = 0.0;
  }
  return zeros;
}

/// A logical rotation knob: value v maps to the listed (name, factor * v)
/// assignments.
struct Knob {
  std::vector<std::pair<std::string, double>> parts;
  bool available = false;
  std::string missing;

  void apply(std::map<std::string, double>& a, double v) const {
    for (const auto& [name, f] : parts) a[name] = f * v;
  }
};

/// Z-axis knob for pair m: the single-site energy difference (occupation
/// split) or sum (parity split), whichever the code reads as logical Z.
inline Knob z_knob(const HamiltonianSpec& spec, const Encoding& enc, int m) {
  const int p = enc.pair_site_a(m), q = enc.pair_site_b(m);
  const double sb = enc.kind == CodeKind::SingleOccupation ? -1.0 : 1.0;
  const std::string np = "eps" + std::to_string(p);
  const std::string nq = "eps" + std::to_string(q);
  Knob k;
  k.missing = np;
  if (spec.is_controllable(np) && spec.is_controllable(nq)) {
    k.parts = {{np, 0.5}, {nq, sb * 0.5}};
    k.available = true;
  } else if (spec.is_controllable(np)) {
    // The conjugate quadrature annihilates the code space, so one site works.
    k.parts = {{np, 1.0}};
    k.available = true;
  } else if (spec.is_controllable(nq)) {
    k.parts = {{nq, sb}};
    k.available = true;
  }
  return k;
}

/// X-axis knob for pair m: the symmetric (J) or antisymmetric (D) exchange
/// combination on the intra-pair bond, falling back to raw Jx/Jy control.
inline Knob x_knob(const HamiltonianSpec& spec, const Encoding& enc, int m) {
  const int p = enc.pair_site_a(m), q = enc.pair_site_b(m);
  const bool single = enc.kind == CodeKind::SingleOccupation;
  const std::string bond = std::to_string(p) + "_" + std::to_string(q);
  const std::string alias = (single ? "J" : "D") + bond;
  Knob k;
  k.missing = alias;
  if (spec.find_coupling(p, q) == nullptr) return k;
  if (spec.is_controllable(alias)) {
    k.parts = {{alias, 1.0}};
    k.available = true;
  } else if (spec.is_controllable("Jx" + bond) && spec.is_controllable("Jy" + bond)) {
    k.parts = {{"Jx" + bond, 0.5}, {"Jy" + bond, single ? 0.5 : -0.5}};
    k.available = true;
  }
  return k;
}

/// Requires the non-controllable part of the device Hamiltonian to act as a
/// multiple of identity on the code space (no stray logical rotations, no
/// leakage) while a gate is played.
inline void check_fixed_drift(const HamiltonianSpec& spec, const Encoding& enc,
                              const std::map<std::string, double>& zeros,
                              int dense_cap) {
  const OperatorSum fixed = build_operator(spec, zeros);
  if (fixed.terms().empty()) return;
  const Eigen::MatrixXcd mv = to_matrix(fixed, dense_cap) * enc.isometry;
  const double d = static_cast<double>(enc.isometry.cols());
  const std::complex<double> c = (enc.isometry.adjoint() * mv).trace() / d;
  const double resid = (mv - c * enc.isometry).norm();
  if (resid > 1e-9 * std::max(1.0, mv.norm()))
    throw CapabilityError(
        "fixed Hamiltonian terms disturb the encoded gate (residual " +
        detail::format_double(resid) + ")");
}

/// Engine-verified scale of a logical generator against a target logical
/// word: least-squares s with V' G V = s * W.
inline double restriction_scale(const Encoding& enc, const OperatorSum& g,
                                const Eigen::MatrixXcd& w, int dense_cap) {
  const Eigen::MatrixXcd r = restrict_matrix(enc.isometry, g, dense_cap);
  const double denom = w.squaredNorm();
  return (w.adjoint() * r).trace().real() / denom;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Embeds a gate on logical qubits m..m+k-1 into the full logical register
/// (logical qubit 1 is the most significant factor).
inline Eigen::MatrixXcd embed_logical(const Eigen::MatrixXcd& gate, int m,
                                      int width, int n_pairs) {
  const Eigen::Index before = Eigen::Index{1} << (m - 1);
  const Eigen::Index after = Eigen::Index{1} << (n_pairs - m - width + 1);
  return kron(kron(Eigen::MatrixXcd::Identity(before, before), gate),
              Eigen::MatrixXcd::Identity(after, after));
}

/// Fills fidelity/leakage of `out` against a target on the logical register.
inline void score_encoded(GateResult& out, const Encoding& enc,
                          const Eigen::MatrixXcd& logical_target) {
  const Eigen::MatrixXcd uv = out.unitary * enc.isometry;
  const Eigen::MatrixXcd restricted = enc.isometry.adjoint() * uv;
  const double d = static_cast<double>(enc.isometry.cols());
  out.fidelity_to_target = trace_fidelity(logical_target, restricted);
  out.leakage = (uv - enc.isometry * restricted).squaredNorm() / d;
  const std::complex<double> tr = (logical_target.adjoint() * restricted).trace();
  const std::complex<double> phase =
      std::abs(tr) > 1e-15 ? tr / std::abs(tr) : std::complex<double>(1, 0);
  out.error_norm = (restricted - phase * logical_target).norm();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoded single-qubit gates.
// ---------------------------------------------------------------------------

/// Schedules an arbitrary special-unitary rotation on logical qubit m using
/// only the pair's energy-split and exchange knobs. Targets with no Y
/// component become one tilted-axis segment; otherwise a three-segment
/// Z-X-Z Euler decomposition is used.
inline GateResult euler_schedule(const HamiltonianSpec& spec, const Encoding& enc,
                                 int m, const Eigen::MatrixXcd& target,
                                 int dense_cap = kDefaultDenseCap) {
  if (spec.n_qubits != enc.n_qubits)
    throw DimensionError("device and encoding sizes differ");
  if (m < 1 || m > enc.n_pairs) throw DimensionError("pair index out of range");
  if (target.rows() != 2 || target.cols() != 2)
    throw DimensionError("single-qubit target must be 2x2");
  if (!nearly_unitary(target, 1e-9) || std::abs(target.determinant() - 1.0) > 1e-9)
    throw ContractError("target must be special unitary");

  const detail::Knob zk = detail::z_knob(spec, enc, m);
  if (!zk.available)
    throw CapabilityError("pair " + std::to_string(m) +
                              " has no controllable energy split",
                          zk.missing);
  const detail::Knob xk = detail::x_knob(spec, enc, m);
  if (!xk.available)
    throw CapabilityError("pair " + std::to_string(m) +
                              " has no controllable exchange knob",
                          xk.missing);
  const auto zeros = detail::zero_controls(spec);
  detail::check_fixed_drift(spec, enc, zeros, dense_cap);

  // Axis-angle form: target = cos(t/2) I - i sin(t/2) n.sigma.
  const double trace_half = std::clamp(target.trace().real() / 2.0, -1.0, 1.0);
  const std::complex<double> ihalf(0, 0.5);
  double nx = (ihalf * (target(1, 0) + target(0, 1))).real();
  double ny = (-(target(0, 1) - target(1, 0)) / 2.0).real();
  double nz = (ihalf * (target(0, 0) - target(1, 1))).real();
  const double vnorm = std::sqrt(nx * nx + ny * ny + nz * nz);
  double theta = 2.0 * std::atan2(vnorm, trace_half);
  if (vnorm > 1e-14) {
    nx /= vnorm;
    ny /= vnorm;
    nz /= vnorm;
  } else {
    // target = +-identity; a full Z turn realizes the minus sign.
    nx = ny = 0.0;
    nz = 1.0;
    theta = trace_half < 0 ? 2.0 * std::numbers::pi : 0.0;
  }

  GateResult out;
  // The engine-verified code-space normalization of the two knob generators.
  const double gz_scale = detail::restriction_scale(
      enc, enc.logical_z(m),
      detail::embed_logical(to_matrix(OperatorSum::single(1, 1, Pauli::Z)), m, 1,
                            enc.n_pairs),
      dense_cap);
  const double gx_scale = detail::restriction_scale(
      enc, enc.logical_x(m),
      detail::embed_logical(to_matrix(OperatorSum::single(1, 1, Pauli::X)), m, 1,
                            enc.n_pairs),
      dense_cap);
  out.relations["gz_code_scale"] = gz_scale;  // 2: energy split theta needs t/2
  out.relations["gx_code_scale"] = gx_scale;  // 1: exchange theta needs t/2

  // Per unit knob value the code-space rates are gz/4 (split feeds eps/2
  // terms, halved again by the Tz/Rz packing) and gx (alias feeds the T/R
  // word directly).
  const double z_rate = gz_scale / 4.0;
  const double x_rate = gx_scale;

  auto add_segment = [&](double zv, double xv, double duration) {
    if (duration <= 1e-14) return;
    Segment seg;
    seg.assignments = zeros;
    zk.apply(seg.assignments, zv);
    xk.apply(seg.assignments, xv);
    seg.duration = duration;
    out.schedule.segments.push_back(std::move(seg));
  };

  if (std::abs(ny) <= 1e-12) {
    // One tilted-axis segment: knob values reproduce (nx X + nz Z)/2.
    add_segment(nz / (2.0 * z_rate), nx / (2.0 * x_rate), theta);
  } else {
    // Z(gamma) then X(beta) then Z(alpha), earliest first.
    const double beta =
        2.0 * std::atan2(std::abs(target(0, 1)), std::abs(target(0, 0)));
    const double sum =
        std::abs(target(0, 0)) > 1e-14 ? -2.0 * std::arg(target(0, 0)) : 0.0;
    const double dif = std::abs(target(0, 1)) > 1e-14
                           ? -2.0 * std::arg(target(0, 1)) - std::numbers::pi
                           : 0.0;
    const double alpha = (sum + dif) / 2.0;
    const double gamma = (sum - dif) / 2.0;
    auto z_segment = [&](double angle) {
      if (std::abs(angle) > 1e-14)
        add_segment((angle < 0 ? -1.0 : 1.0) / (2.0 * z_rate), 0.0,
                    std::abs(angle));
    };
    z_segment(gamma);
    if (std::abs(beta) > 1e-14)
      add_segment(0.0, (beta < 0 ? -1.0 : 1.0) / (2.0 * x_rate), std::abs(beta));
    z_segment(alpha);
  }

  out.unitary = schedule_unitary(spec, out.schedule, dense_cap);
  out.step_count = static_cast<int>(out.schedule.segments.size());
  out.converged = true;
  detail::score_encoded(out, enc,
                        detail::embed_logical(target, m, 1, enc.n_pairs));
  return out;
}

// ---------------------------------------------------------------------------
// Encoded entangling gate.
// ---------------------------------------------------------------------------

/// Schedules the inter-pair sigma^z sigma^z coupling for a controlled-phase
/// class gate between logical qubits m and m+1. zz_angle is the magnitude of
/// the realized Z(x)Z phase angle; pi/4 gives the CZ equivalence class.
inline GateResult entangling_schedule(const HamiltonianSpec& spec,
                                      const Encoding& enc, int m,
                                      double zz_angle = std::numbers::pi / 4,
                                      int dense_cap = kDefaultDenseCap) {
  if (spec.n_qubits != enc.n_qubits)
    throw DimensionError("device and encoding sizes differ");
  if (enc.n_pairs < 2 || m < 1 || m >= enc.n_pairs)
    throw DimensionError("entangling gate needs adjacent pairs m, m+1");
  const EntanglingAction act = entangling_generator(enc, m);
  const int a = enc.pair_site_b(m), b = enc.pair_site_a(m + 1);
  const std::string knob = "Jz" + std::to_string(a) + "_" + std::to_string(b);
  if (spec.find_coupling(a, b) == nullptr || !spec.is_controllable(knob))
    throw CapabilityError("inter-pair coupling " + knob + " is not controllable",
                          knob);
  const auto zeros = detail::zero_controls(spec);
  detail::check_fixed_drift(spec, enc, zeros, dense_cap);

  GateResult out;
  // Restricted generator per unit Jz: scale * Gz Gz' = 4*scale on Z(x)Z.
  const double zz_rate = 4.0 * act.scale;
  out.relations["zz_code_scale"] = zz_rate;
  const double phi = std::abs(zz_angle);
  if (phi > 1e-14) {
    Segment seg;
    seg.assignments = zeros;
    seg.assignments[knob] = 1.0;
    seg.duration = phi / std::abs(zz_rate);
    out.schedule.segments.push_back(std::move(seg));
    out.relations["duration"] = out.schedule.segments.back().duration;
  }
  out.unitary = schedule_unitary(spec, out.schedule, dense_cap);
  out.step_count = static_cast<int>(out.schedule.segments.size());
  out.converged = true;

  // Predicted logical gate: e^{-i phi sgn(rate) Z(x)Z} on pairs m, m+1.
  Eigen::MatrixXcd zz = Eigen::MatrixXcd::Zero(4, 4);
  zz(0, 0) = zz(3, 3) = 1.0;
  zz(1, 1) = zz(2, 2) = -1.0;
  const Eigen::MatrixXcd gate =
      expm_hermitian(zz, phi * (zz_rate < 0 ? -1.0 : 1.0));
  detail::score_encoded(out, enc,
                        detail::embed_logical(gate, m, 2, enc.n_pairs));
  return out;
}

// ---------------------------------------------------------------------------
// Two-qubit local-equivalence invariants.
// ---------------------------------------------------------------------------

struct LocalInvariants {
  std::complex<double> g1;
  double g2 = 0.0;
};

/// Canonical local invariants of a two-qubit gate (magic-basis construction).
/// Gates differing only by single-qubit rotations and global phase share
/// them: the controlled-phase class has (0, 1), the identity class (1, 3).
inline LocalInvariants local_invariants(const Eigen::MatrixXcd& u) {
  if (u.rows() != 4 || u.cols() != 4)
    throw DimensionError("local invariants are defined for 4x4 unitaries");
  if (!nearly_unitary(u, 1e-8))
    throw ContractError("local invariants require a unitary matrix");
  const std::complex<double> i(0, 1);
  Eigen::MatrixXcd q(4, 4);
  q << 1, 0, 0, i,
       0, i, 1, 0,
       0, i, -1, 0,
       1, 0, 0, -i;
  q /= std::sqrt(2.0);
  const Eigen::MatrixXcd mb = q.adjoint() * u * q;
  const Eigen::MatrixXcd mm = mb.transpose() * mb;
  const std::complex<double> tr = mm.trace();
  const std::complex<double> det = u.determinant();
  LocalInvariants out;
  out.g1 = tr * tr / (16.0 * det);
  out.g2 = ((tr * tr - (mm * mm).trace()) / (4.0 * det)).real();
  return out;
}

inline bool locally_equivalent(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v,
                               double tol = 1e-8) {
  const LocalInvariants a = local_invariants(u);
  const LocalInvariants b = local_invariants(v);
  return std::abs(a.g1 - b.g1) <= tol && std::abs(a.g2 - b.g2) <= tol;
}

// ---------------------------------------------------------------------------
// Refocusing.
// ---------------------------------------------------------------------------

/// Interleaves hard pi-pulses about the logical X of the given pairs (two
/// per input segment) so that fixed dephasing drifts (energy splits,
/// inter-pair sigma^z sigma^z) cancel over each echo period. The fixed drift
/// after echo-averaging must act as a multiple of identity on the code space.
inline ControlSchedule refocus(const HamiltonianSpec& spec,
                               const ControlSchedule& schedule, const Encoding& enc,
                               const std::vector<int>& pairs,
                               double pulse_amp = 1e9,
                               int dense_cap = kDefaultDenseCap) {
  if (spec.n_qubits != enc.n_qubits)
    throw DimensionError("device and encoding sizes differ");
  if (pairs.empty()) throw ContractError("refocus needs at least one echoed pair");
  for (int m : pairs)
    if (m < 1 || m > enc.n_pairs)
      throw DimensionError("echoed pair index out of range");
  if (pulse_amp <= 0) throw ContractError("pulse amplitude must be positive");
  validate_schedule(spec, schedule);

  const auto zeros = detail::zero_controls(spec);
  const OperatorSum drift = build_operator(spec, zeros);
  if (drift.terms().empty()) return schedule;
  for (const auto& [word, coeff] : drift.terms())
    for (int s = 1; s <= spec.n_qubits; ++s)
      if (word.at(s) == Pauli::X || word.at(s) == Pauli::Y)
        throw CapabilityError("drift term " + word.str() +
                              " is not a dephasing term and cannot be refocused");

  // Echo pulse: product of e^{-i pi/2 Gx} over the echoed pairs.
  OperatorSum pulse_gen(spec.n_qubits);
  for (int m : pairs) pulse_gen = pulse_gen + enc.logical_x(m);
  const Eigen::MatrixXcd xp =
      exact_unitary(pulse_gen, std::numbers::pi / 2.0, dense_cap);

  // Echo-averaged drift must be trivial on the code space.
  const Eigen::MatrixXcd dm = to_matrix(drift, dense_cap);
  const Eigen::MatrixXcd surv = (xp * dm * xp.adjoint() + dm) / 2.0;
  const Eigen::MatrixXcd sv = surv * enc.isometry;
  const double d = static_cast<double>(enc.isometry.cols());
  const std::complex<double> c = (enc.isometry.adjoint() * sv).trace() / d;
  const double resid = (sv - c * enc.isometry).norm();
  if (resid > 1e-9 * std::max(1.0, sv.norm()))
    throw CapabilityError("drift survives the echo sequence (residual " +
                          detail::format_double(resid) + ")");

  Segment pulse;
  pulse.assignments = zeros;
  for (int m : pairs) {
    const detail::Knob xk = detail::x_knob(spec, enc, m);
    if (!xk.available)
      throw CapabilityError("pair " + std::to_string(m) +
                                " has no controllable exchange knob for echoes",
                            xk.missing);
    xk.apply(pulse.assignments, pulse_amp);
  }
  pulse.duration = std::numbers::pi / (2.0 * pulse_amp);

  ControlSchedule out;
  for (const auto& seg : schedule.segments) {
    Segment half = seg;
    half.duration = seg.duration / 2.0;
    out.segments.push_back(half);
    out.segments.push_back(pulse);
    out.segments.push_back(half);
    out.segments.push_back(pulse);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Numerical compilation.
// ---------------------------------------------------------------------------

struct CompileOptions {
  int restarts = 3;
  int scan_points = 25;
  int max_sweeps = 40;
  double early_exit = 1.0 - 1e-10;
  int dense_cap = kDefaultDenseCap;
};

namespace detail {

/// Deterministic uniform draw in [lo, hi) from raw engine words.
inline double uniform_draw(std::mt19937& rng, double lo, double hi) {
  const double u = std::ldexp(static_cast<double>(rng()), -32);
  return lo + (hi - lo) * u;
}

struct CoordinateObjective {
  // |sum_j c_j e^{-i theta lambda_j}|^2 maximized over theta by scanning
  // then golden-section refinement.
  Eigen::VectorXcd c;
  Eigen::VectorXd lam;

  double value(double theta) const {
    std::complex<double> s = 0;
    for (Eigen::Index j = 0; j < c.size(); ++j)
      s += c(j) * std::exp(std::complex<double>(0, -theta * lam(j)));
    return std::norm(s);
  }

  double maximize(int scan_points, double span) const {
    double best_t = 0.0, best_v = value(0.0);
    for (int k = 0; k < scan_points; ++k) {
      const double t = -span + 2.0 * span * k / (scan_points - 1);
      const double v = value(t);
      if (v > best_v) {
        best_v = v;
        best_t = t;
      }
    }
    const double step = 2.0 * span / (scan_points - 1);
    double lo = best_t - step, hi = best_t + step;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = value(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = value(x1);
      }
    }
    const double mid = (lo + hi) / 2.0;
    return value(mid) >= best_v ? mid : best_t;
  }
};

}  // namespace detail

/// Numerically compiles a target unitary on the subspace spanned by the
/// isometry's columns from an alternating sequence of the given generators,
/// optimizing segment angles by deterministic coordinate descent. Requires
/// the generators' restricted Lie closure to be full on that subspace.
inline GateResult compile_gate(const Eigen::MatrixXcd& target,
                               const std::vector<OperatorSum>& generators,
                               const Eigen::MatrixXcd& isometry, int budget,
                               const CompileOptions& opts = {}) {
  if (generators.empty()) throw ContractError("compile_gate needs generators");
  if (budget < 1) throw ContractError("segment budget must be at least 1");
  const Eigen::Index d = isometry.cols();
  if (target.rows() != d || target.cols() != d)
    throw DimensionError("target does not match the subspace dimension");
  if (!nearly_unitary(target, 1e-9))
    throw ContractError("compile_gate target must be unitary");

  const Eigen::MatrixXcd projector = isometry * isometry.adjoint();
  const RestrictedClosure rc =
      restricted_closure(generators, projector, -1, opts.dense_cap);
  if (!rc.full_special_unitary)
    throw CapabilityError(
        "generators do not span the subspace unitaries (traceless dimension " +
        std::to_string(rc.traceless_dim) + " of " + std::to_string(d * d - 1) +
        ")");

  GateResult out;
  out.relations["traceless_dimension"] = static_cast<double>(rc.traceless_dim);

  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(d, d);
  if (trace_fidelity(target, eye) >= 1.0 - 1e-12) {
    const Eigen::Index full = isometry.rows();
    out.unitary = Eigen::MatrixXcd::Identity(full, full);
    out.fidelity_to_target = 1.0;
    out.converged = true;
    return out;
  }

  // Restricted generators, eigendecomposed once.
  const int k = static_cast<int>(generators.size());
  std::vector<Eigen::MatrixXcd> vecs(k);
  std::vector<Eigen::VectorXd> vals(k);
  for (int g = 0; g < k; ++g) {
    Eigen::MatrixXcd r = restrict_matrix(isometry, generators[g], opts.dense_cap);
    r = Eigen::MatrixXcd((r + r.adjoint()) / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r);
    vecs[g] = es.eigenvectors();
    vals[g] = es.eigenvalues();
  }
  auto segment_unitary = [&](int g, double theta) {
    Eigen::VectorXcd ph(d);
    for (Eigen::Index j = 0; j < d; ++j)
      ph(j) = std::exp(std::complex<double>(0, -theta * vals[g](j)));
    return Eigen::MatrixXcd(vecs[g] * ph.asDiagonal() * vecs[g].adjoint());
  };
  auto ansatz_fidelity = [&](const std::vector<double>& theta) {
    Eigen::MatrixXcd u = eye;
    for (int s = 0; s < budget; ++s) u = segment_unitary(s % k, theta[s]) * u;
    return trace_fidelity(target, u);
  };

  const double span = std::numbers::pi;
  std::vector<double> best_theta(budget, 0.0);
  double best_fid = -1.0;
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937 rng(9001u + static_cast<unsigned>(r));
    std::vector<double> theta(budget);
    for (double& t : theta) t = detail::uniform_draw(rng, -1.0, 1.0);
    double fid = ansatz_fidelity(theta);
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      // Suffix products with the sweep-start angles; prefixes are rebuilt
      // incrementally as coordinates update.
      std::vector<Eigen::MatrixXcd> suffix(budget + 1, eye);
      for (int s = budget - 1; s >= 0; --s)
        suffix[s] = Eigen::MatrixXcd(suffix[s + 1] * segment_unitary(s % k, theta[s]));
      Eigen::MatrixXcd prefix = eye;
      for (int s = 0; s < budget; ++s) {
        const int g = s % k;
        // tr(target' A e^{-i theta G} B) with A = suffix, B = prefix.
        const Eigen::MatrixXcd m = vecs[g].adjoint() * prefix * target.adjoint() *
                                   suffix[s + 1] * vecs[g];
        detail::CoordinateObjective obj;
        obj.c = m.diagonal() / static_cast<double>(d);
        obj.lam = vals[g];
        theta[s] = obj.maximize(opts.scan_points, span);
        prefix = Eigen::MatrixXcd(segment_unitary(g, theta[s]) * prefix);
      }
      const double now = ansatz_fidelity(theta);
      const bool stalled = now <= fid + 1e-14;
      fid = now;
      if (fid >= opts.early_exit || stalled) break;
    }
    if (fid > best_fid) {
      best_fid = fid;
      best_theta = theta;
    }
    if (best_fid >= opts.early_exit) break;
  }

  // Materialize the winning schedule over named abstract generators.
  std::map<std::string, OperatorSum> ops;
  for (int g = 0; g < k; ++g) ops.emplace("G" + std::to_string(g + 1), generators[g]);
  for (int s = 0; s < budget; ++s) {
    if (std::abs(best_theta[s]) <= 1e-15) continue;
    Segment seg;
    seg.assignments["G" + std::to_string(s % k + 1)] =
        best_theta[s] < 0 ? -1.0 : 1.0;
    seg.duration = std::abs(best_theta[s]);
    out.schedule.segments.push_back(std::move(seg));
  }
  out.unitary = schedule_unitary(ops, out.schedule, opts.dense_cap);
  out.step_count = static_cast<int>(out.schedule.segments.size());

  const Eigen::MatrixXcd uv = out.unitary * isometry;
  const Eigen::MatrixXcd restricted = isometry.adjoint() * uv;
  out.fidelity_to_target = trace_fidelity(target, restricted);
  out.leakage = (uv - isometry * restricted).squaredNorm() / static_cast<double>(d);
  out.converged = out.fidelity_to_target >= opts.early_exit;
  return out;
}

}  // namespace anex
