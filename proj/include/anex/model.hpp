#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "anex/operator_sum.hpp"

namespace anex {

struct Coupling {
  int i = 0, j = 0;  // 1-based, i < j
  double jx = 0, jy = 0, jz = 0;
};

struct DmVector {
  int i = 0, j = 0;  // 1-based, i < j
  double dx = 0, dy = 0, dz = 0;
};

/// Device description: baseline parameter values plus the set of parameter
/// names schedules may drive.
struct HamiltonianSpec {
  int n_qubits = 0;
  std::vector<double> eps;  // index 0 holds site 1
  std::vector<double> fx, fy;
  std::vector<Coupling> couplings;
  std::vector<DmVector> dm;
  std::vector<std::string> controllable;  // sorted, unique

  const Coupling* find_coupling(int i, int j) const {
    for (const auto& c : couplings)
      if (c.i == i && c.j == j) return &c;
    return nullptr;
  }
  const DmVector* find_dm(int i, int j) const {
    for (const auto& d : dm)
      if (d.i == i && d.j == j) return &d;
    return nullptr;
  }
  bool is_controllable(const std::string& name) const {
    return std::binary_search(controllable.begin(), controllable.end(), name);
  }
};

// ---------------------------------------------------------------------------
// Parameter names.
//
// Raw parameters: eps<i>, fx<i>, fy<i>, Jx<i>_<j>, Jy<i>_<j>, Jz<i>_<j>,
// dx<i>_<j>, dy<i>_<j>, dz<i>_<j>. Aliases address the exchange combinations
// the physics cares about: J<i>_<j> is the symmetric part Jx+Jy (assignment
// preserves the current difference), D<i>_<j> is the antisymmetric part
// Jx-Jy (assignment preserves the current sum), Jh<i>_<j> sets the isotropic
// point Jx=Jy=Jz=value.
// ---------------------------------------------------------------------------

enum class ParamKind {
  Eps, Fx, Fy, Jx, Jy, Jz, Dx, Dy, Dz, AliasJ, AliasD, AliasHeis
};

struct ParamRef {
  ParamKind kind;
  int i = 0, j = 0;  // j unused for single-site parameters
};

namespace detail {

inline std::optional<int> parse_index(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

inline std::optional<std::pair<int, int>> parse_pair_suffix(std::string_view s) {
  const auto us = s.find('_');
  if (us == std::string_view::npos) return std::nullopt;
  const auto a = parse_index(s.substr(0, us));
  const auto b = parse_index(s.substr(us + 1));
  if (!a || !b) return std::nullopt;
  return std::make_pair(*a, *b);
}

}  // namespace detail

inline std::optional<ParamRef> parse_param_name(std::string_view name) {
  struct Prefix {
    std::string_view text;
    ParamKind kind;
    bool pair;
  };
  // Longest prefixes first so "Jh"/"Jx" win over "J".
  static const Prefix kPrefixes[] = {
      {"eps", ParamKind::Eps, false}, {"fx", ParamKind::Fx, false},
      {"fy", ParamKind::Fy, false},   {"Jx", ParamKind::Jx, true},
      {"Jy", ParamKind::Jy, true},    {"Jz", ParamKind::Jz, true},
      {"Jh", ParamKind::AliasHeis, true}, {"dx", ParamKind::Dx, true},
      {"dy", ParamKind::Dy, true},    {"dz", ParamKind::Dz, true},
      {"J", ParamKind::AliasJ, true}, {"D", ParamKind::AliasD, true},
  };
  for (const auto& p : kPrefixes) {
    if (name.substr(0, p.text.size()) != p.text) continue;
    const auto suffix = name.substr(p.text.size());
    if (p.pair) {
      if (const auto ij = detail::parse_pair_suffix(suffix))
        return ParamRef{p.kind, ij->first, ij->second};
    } else {
      if (const auto i = detail::parse_index(suffix)) return ParamRef{p.kind, *i, 0};
    }
  }
  return std::nullopt;
}

/// Checks that the named parameter exists in the device (site in range, bond
/// or DM vector declared). Returns the parsed reference.
inline ParamRef validate_param_name(const HamiltonianSpec& spec,
                                    const std::string& name) {
  const auto ref = parse_param_name(name);
  if (!ref) throw ContractError("unknown parameter '" + name + "'");
  switch (ref->kind) {
    case ParamKind::Eps:
    case ParamKind::Fx:
    case ParamKind::Fy:
      if (ref->i < 1 || ref->i > spec.n_qubits)
        throw ContractError("parameter '" + name + "' references qubit " +
                            std::to_string(ref->i) + " outside [1, " +
                            std::to_string(spec.n_qubits) + "]");
      break;
    case ParamKind::Jx:
    case ParamKind::Jy:
    case ParamKind::Jz:
    case ParamKind::AliasJ:
    case ParamKind::AliasD:
    case ParamKind::AliasHeis:
      if (!spec.find_coupling(ref->i, ref->j))
        throw ContractError("parameter '" + name + "' references undeclared bond " +
                            std::to_string(ref->i) + "-" + std::to_string(ref->j));
      break;
    case ParamKind::Dx:
    case ParamKind::Dy:
    case ParamKind::Dz:
      if (!spec.find_dm(ref->i, ref->j))
        throw ContractError("parameter '" + name +
                            "' references undeclared DM vector " +
                            std::to_string(ref->i) + "-" + std::to_string(ref->j));
      break;
  }
  return *ref;
}

namespace detail {

struct BondAssign {
  std::optional<double> jx, jy, jz, alias_j, alias_d, alias_h;
};

/// Parameter values after applying an assignment map on top of baselines.
struct ResolvedParams {
  std::vector<double> eps, fx, fy;
  std::vector<Coupling> couplings;
  std::vector<DmVector> dm;
};

inline ResolvedParams resolve_parameters(const HamiltonianSpec& spec,
                                         const std::map<std::string, double>& assignments) {
  ResolvedParams r{spec.eps, spec.fx, spec.fy, spec.couplings, spec.dm};
  std::map<std::pair<int, int>, BondAssign> bonds;
  for (const auto& [name, value] : assignments) {
    const ParamRef ref = validate_param_name(spec, name);
    switch (ref.kind) {
      case ParamKind::Eps: r.eps[ref.i - 1] = value; break;
      case ParamKind::Fx: r.fx[ref.i - 1] = value; break;
      case ParamKind::Fy: r.fy[ref.i - 1] = value; break;
      case ParamKind::Jx: bonds[{ref.i, ref.j}].jx = value; break;
      case ParamKind::Jy: bonds[{ref.i, ref.j}].jy = value; break;
      case ParamKind::Jz: bonds[{ref.i, ref.j}].jz = value; break;
      case ParamKind::AliasJ: bonds[{ref.i, ref.j}].alias_j = value; break;
      case ParamKind::AliasD: bonds[{ref.i, ref.j}].alias_d = value; break;
      case ParamKind::AliasHeis: bonds[{ref.i, ref.j}].alias_h = value; break;
      case ParamKind::Dx:
      case ParamKind::Dy:
      case ParamKind::Dz:
        for (auto& d : r.dm)
          if (d.i == ref.i && d.j == ref.j) {
            if (ref.kind == ParamKind::Dx) d.dx = value;
            if (ref.kind == ParamKind::Dy) d.dy = value;
            if (ref.kind == ParamKind::Dz) d.dz = value;
          }
        break;
    }
  }
  for (const auto& [ij, ba] : bonds) {
    Coupling* c = nullptr;
    for (auto& rc : r.couplings)
      if (rc.i == ij.first && rc.j == ij.second) c = &rc;
    const std::string bond_name =
        std::to_string(ij.first) + "_" + std::to_string(ij.second);
    const bool any_raw = ba.jx || ba.jy || ba.jz;
    const bool any_sym = ba.alias_j || ba.alias_d;
    if (ba.alias_h && (any_raw || any_sym))
      throw ContractError("conflicting assignments on bond " + bond_name +
                          ": Jh excludes other exchange parameters");
    if (any_sym && (ba.jx || ba.jy))
      throw ContractError("conflicting assignments on bond " + bond_name +
                          ": J/D aliases exclude raw Jx/Jy");
    if (ba.alias_h) {
      c->jx = c->jy = c->jz = *ba.alias_h;
      continue;
    }
    if (any_sym) {
      const double sum = ba.alias_j ? *ba.alias_j : c->jx + c->jy;
      const double diff = ba.alias_d ? *ba.alias_d : c->jx - c->jy;
      c->jx = (sum + diff) / 2;
      c->jy = (sum - diff) / 2;
    }
    if (ba.jx) c->jx = *ba.jx;
    if (ba.jy) c->jy = *ba.jy;
    if (ba.jz) c->jz = *ba.jz;
  }
  return r;
}

}  // namespace detail

/// Antisymmetric exchange (cross-product) term d . (s_i x s_j).
inline OperatorSum dm_term(int n_qubits, int i, int j, double dx, double dy,
                           double dz) {
  if (i < 1 || j < 1 || i > n_qubits || j > n_qubits || i == j)
    throw DimensionError("dm_term requires distinct sites in range");
  OperatorSum out(n_qubits);
  auto w = [&](Pauli a, Pauli b, double c) {
    if (c == 0.0) return;
    out.add(PauliString(n_qubits).with(i, a).with(j, b), c);
  };
  w(Pauli::Y, Pauli::Z, dx);
  w(Pauli::Z, Pauli::Y, -dx);
  w(Pauli::Z, Pauli::X, dy);
  w(Pauli::X, Pauli::Z, -dy);
  w(Pauli::X, Pauli::Y, dz);
  w(Pauli::Y, Pauli::X, -dz);
  return out;
}

/// Assembles the device Hamiltonian with the given assignments applied on
/// top of baseline values:
///   H = sum_i eps_i/2 Z_i + fx_i X_i + fy_i Y_i
///     + sum_bonds Jx XX + Jy YY + Jz ZZ + sum_dm d . (s x s).
inline OperatorSum build_operator(const HamiltonianSpec& spec,
                                  const std::map<std::string, double>& assignments = {}) {
  if (spec.n_qubits < 1) throw ContractError("device has no qubits");
  const auto p = detail::resolve_parameters(spec, assignments);
  OperatorSum h(spec.n_qubits);
  for (int i = 1; i <= spec.n_qubits; ++i) {
    if (p.eps[i - 1] != 0.0)
      h.add(PauliString(spec.n_qubits).with(i, Pauli::Z), p.eps[i - 1] / 2);
    if (p.fx[i - 1] != 0.0)
      h.add(PauliString(spec.n_qubits).with(i, Pauli::X), p.fx[i - 1]);
    if (p.fy[i - 1] != 0.0)
      h.add(PauliString(spec.n_qubits).with(i, Pauli::Y), p.fy[i - 1]);
  }
  for (const auto& c : p.couplings) {
    auto w = [&](Pauli a, double v) {
      if (v != 0.0) h.add(PauliString(spec.n_qubits).with(c.i, a).with(c.j, a), v);
    };
    w(Pauli::X, c.jx);
    w(Pauli::Y, c.jy);
    w(Pauli::Z, c.jz);
  }
  for (const auto& d : p.dm)
    h += dm_term(spec.n_qubits, d.i, d.j, d.dx, d.dy, d.dz);
  return h;
}

/// Per-bond exchange combinations (delta = Jx - Jy, j_sym = Jx + Jy).
struct ExchangeEntry {
  int i, j;
  double delta, j_sym, jz;
};

inline std::vector<ExchangeEntry> exchange_form(const HamiltonianSpec& spec) {
  std::vector<ExchangeEntry> out;
  for (const auto& c : spec.couplings)
    out.push_back({c.i, c.j, c.jx - c.jy, c.jx + c.jy, c.jz});
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise block form for even chains: sites (2m-1, 2m) form mode m.
// ---------------------------------------------------------------------------

/// Intra-pair mode parameters. T/R generators on pair m:
///   Tx = (XX + YY)/2, Tz = Z_{2m-1} - Z_{2m}   (axially symmetric set)
///   Rx = (XX - YY)/2, Rz = Z_{2m-1} + Z_{2m}   (axially asymmetric set)
struct PairMode {
  double eps;    // eps_{2m-1} - eps_{2m}
  double omega;  // eps_{2m-1} + eps_{2m}
  double j;      // Jx + Jy on the pair bond
  double delta;  // Jx - Jy on the pair bond
  double jz;     // Jz on the pair bond
};

struct InterPairMode {
  double jz;     // Jz on bond (2m, 2m+1)
  double j;      // Jx + Jy on that bond
  double delta;  // Jx - Jy on that bond
};

struct BlockForm {
  int n_qubits = 0;
  int n_pairs = 0;
  std::vector<PairMode> pairs;
  std::vector<InterPairMode> inter;  // size n_pairs - 1
  OperatorSum h1{2};                 // sum_m (omega_m / 4) Rz_m
  OperatorSum h0{2};                 // sum_m jz_m Z_{2m-1} Z_{2m}
  // Engine-verified scale in (Rz)^2 - (Tz)^2 = scale * ZZ on a pair.
  double h0_identity_scale = 0.0;

  /// Exact reassembly of the exchange + eps part:
  ///   sum_m (eps_m/4) Tz + j_m Tx + delta_m Rx + jz_m ZZ + h1
  /// + sum_m inter-pair (Jz ZZ + j Tx + delta Rx on (2m, 2m+1)).
  OperatorSum reassemble() const;
};

namespace detail {

inline void add_pair_ops(OperatorSum& h, int n, int a, int b, double tz_coeff,
                         double tx_coeff, double rx_coeff, double rz_coeff,
                         double zz_coeff) {
  auto w2 = [&](Pauli p, Pauli q, double v) {
    if (v != 0.0) h.add(PauliString(n).with(a, p).with(b, q), v);
  };
  auto w1 = [&](int site, double v) {
    if (v != 0.0) h.add(PauliString(n).with(site, Pauli::Z), v);
  };
  // Tz = Z_a - Z_b, Rz = Z_a + Z_b, Tx = (XX+YY)/2, Rx = (XX-YY)/2.
  w1(a, tz_coeff + rz_coeff);
  w1(b, rz_coeff - tz_coeff);
  w2(Pauli::X, Pauli::X, tx_coeff / 2 + rx_coeff / 2);
  w2(Pauli::Y, Pauli::Y, tx_coeff / 2 - rx_coeff / 2);
  w2(Pauli::Z, Pauli::Z, zz_coeff);
}

}  // namespace detail

inline OperatorSum BlockForm::reassemble() const {
  OperatorSum h(n_qubits);
  for (int m = 1; m <= n_pairs; ++m) {
    const auto& p = pairs[m - 1];
    detail::add_pair_ops(h, n_qubits, 2 * m - 1, 2 * m, p.eps / 4, p.j, p.delta,
                         p.omega / 4, p.jz);
  }
  for (int m = 1; m < n_pairs; ++m) {
    const auto& ip = inter[m - 1];
    detail::add_pair_ops(h, n_qubits, 2 * m, 2 * m + 1, 0, ip.j, ip.delta, 0, ip.jz);
  }
  return h;
}

/// Decomposes an even chain whose bonds live only on (2m-1, 2m) and
/// (2m, 2m+1) into pair modes. Fields and DM vectors are not part of the
/// block data; reassemble() reproduces build_operator exactly when they are
/// absent.
inline BlockForm block_form(const HamiltonianSpec& spec) {
  if (spec.n_qubits < 2 || spec.n_qubits % 2 != 0)
    throw ContractError("block form requires an even qubit count");
  BlockForm out;
  out.n_qubits = spec.n_qubits;
  out.n_pairs = spec.n_qubits / 2;
  out.pairs.resize(out.n_pairs);
  out.inter.resize(out.n_pairs - 1);
  for (const auto& c : spec.couplings) {
    const bool intra = (c.i % 2 == 1) && (c.j == c.i + 1);
    const bool cross = (c.i % 2 == 0) && (c.j == c.i + 1);
    if (!intra && !cross)
      throw ContractError("bond " + std::to_string(c.i) + "-" + std::to_string(c.j) +
                          " is neither intra-pair nor nearest inter-pair");
    if (intra) {
      auto& p = out.pairs[(c.i - 1) / 2];
      p.j = c.jx + c.jy;
      p.delta = c.jx - c.jy;
      p.jz = c.jz;
    } else {
      auto& ip = out.inter[c.i / 2 - 1];
      ip.jz = c.jz;
      ip.j = c.jx + c.jy;
      ip.delta = c.jx - c.jy;
    }
  }
  for (int m = 1; m <= out.n_pairs; ++m) {
    auto& p = out.pairs[m - 1];
    p.eps = spec.eps[2 * m - 2] - spec.eps[2 * m - 1];
    p.omega = spec.eps[2 * m - 2] + spec.eps[2 * m - 1];
  }
  out.h1 = OperatorSum(spec.n_qubits);
  out.h0 = OperatorSum(spec.n_qubits);
  for (int m = 1; m <= out.n_pairs; ++m) {
    const auto& p = out.pairs[m - 1];
    if (p.omega != 0.0) {
      out.h1.add(PauliString(spec.n_qubits).with(2 * m - 1, Pauli::Z), p.omega / 4);
      out.h1.add(PauliString(spec.n_qubits).with(2 * m, Pauli::Z), p.omega / 4);
    }
    if (p.jz != 0.0)
      out.h0.add(PauliString(spec.n_qubits).with(2 * m - 1, Pauli::Z).with(2 * m, Pauli::Z),
                 p.jz);
  }
  // Verify (Rz)^2 - (Tz)^2 = scale * Z_a Z_b on pair 1 and record the scale.
  {
    const int n = spec.n_qubits;
    OperatorSum tz(n), rz(n);
    tz.add(PauliString(n).with(1, Pauli::Z), 1.0);
    tz.add(PauliString(n).with(2, Pauli::Z), -1.0);
    rz.add(PauliString(n).with(1, Pauli::Z), 1.0);
    rz.add(PauliString(n).with(2, Pauli::Z), 1.0);
    const OperatorSum diff = product(rz, rz) - product(tz, tz);
    const PauliString zz = PauliString(n).with(1, Pauli::Z).with(2, Pauli::Z);
    const auto scale = hs_inner(OperatorSum::term(zz, 1.0), diff);
    if (hs_norm(diff - OperatorSum::term(zz, scale)) > 1e-12)
      throw ContractError("pair quadratic identity failed to reduce to ZZ");
    out.h0_identity_scale = scale.real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Control schedules.
// ---------------------------------------------------------------------------

struct Segment {
  std::map<std::string, double> assignments;
  double duration = 0.0;
};

/// Piecewise-constant control program; each segment realizes
/// exp(-i H(assignments) * duration).
struct ControlSchedule {
  std::vector<Segment> segments;

  double total_duration() const {
    double t = 0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
};

/// Checks a schedule against a device: every assignment must name an
/// existing parameter, durations must be positive, and a parameter outside
/// the controllable set may only be "assigned" its baseline value.
inline void validate_schedule(const HamiltonianSpec& spec, const ControlSchedule& sched) {
  for (std::size_t k = 0; k < sched.segments.size(); ++k) {
    const auto& seg = sched.segments[k];
    if (!(seg.duration > 0.0))
      throw ContractError("segment " + std::to_string(k + 1) +
                          " has non-positive duration");
    for (const auto& [name, value] : seg.assignments) {
      validate_param_name(spec, name);
      if (spec.is_controllable(name)) continue;
      // Fixed parameters: the only admissible assignment is the baseline.
      const auto base = detail::resolve_parameters(spec, {});
      const auto here = detail::resolve_parameters(spec, {{name, value}});
      if (base.eps != here.eps || base.fx != here.fx || base.fy != here.fy ||
          [&] {
            for (std::size_t b = 0; b < base.couplings.size(); ++b) {
              const auto &x = base.couplings[b], &y = here.couplings[b];
              if (x.jx != y.jx || x.jy != y.jy || x.jz != y.jz) return true;
            }
            for (std::size_t b = 0; b < base.dm.size(); ++b) {
              const auto &x = base.dm[b], &y = here.dm[b];
              if (x.dx != y.dx || x.dy != y.dy || x.dz != y.dz) return true;
            }
            return false;
          }())
        throw CapabilityError("segment " + std::to_string(k + 1) + " drives '" +
                                  name + "' which is not controllable",
                              name);
    }
  }
}

}  // namespace anex
