#pragma once

#include <string>
#include <vector>

#include "anex/closure.hpp"
#include "anex/ladder.hpp"
#include "anex/model.hpp"

namespace anex {

/// Returns a copy of the device with the assignments folded into the
/// baseline parameter values.
inline HamiltonianSpec with_assignments(const HamiltonianSpec& spec,
                                        const std::map<std::string, double>& a) {
  const auto p = detail::resolve_parameters(spec, a);
  HamiltonianSpec out = spec;
  out.eps = p.eps;
  out.fx = p.fx;
  out.fy = p.fy;
  out.couplings = p.couplings;
  out.dm = p.dm;
  return out;
}

/// The reachable family H(a) = drift + sum_p a_p * generator_p, one
/// direction per controllable parameter. The drift is the device with every
/// controllable parameter switched off.
struct ControlSystem {
  OperatorSum drift{1};
  std::vector<std::string> names;
  std::vector<OperatorSum> generators;
};

inline ControlSystem control_generators(const HamiltonianSpec& spec) {
  // Zero the controllables one at a time: folding them jointly could pair
  // an alias with a raw name on the same bond, which assignment maps reject.
  HamiltonianSpec zeroed = spec;
  for (const auto& name : spec.controllable)
    zeroed = with_assignments(zeroed, {{name, 0.0}});
  ControlSystem sys;
  sys.drift = build_operator(zeroed);
  for (const auto& name : spec.controllable) {
    sys.names.push_back(name);
    sys.generators.push_back(build_operator(zeroed, {{name, 1.0}}) - sys.drift);
  }
  return sys;
}

enum class Verdict { Universal, NotUniversal, UniversalOnSubspaceCandidate };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Universal: return "universal";
    case Verdict::NotUniversal: return "not-universal";
    default: return "universal-on-subspace-candidate";
  }
}

struct ClosureReport {
  ControlSystem system;
  LieBasis closure;
  int traceless_dim = 0;
  bool conserves_number = false;
  bool conserves_parity = false;
  Grading overall = Grading::NumberConserving;  // join over all generators
  Verdict verdict = Verdict::UniversalOnSubspaceCandidate;
  // Invariant-subspace dimensions: n-eigenspaces if number is conserved,
  // parity halves if only parity is, the full space otherwise.
  std::vector<int> block_dims;
};

/// Classifies the device: assembles the control directions, closes them
/// under the bracket, and scores the algebra against full universality
/// (traceless dimension 4^N - 1) and the parity-even ceiling (2^{2N-1}).
inline ClosureReport universality_report(const HamiltonianSpec& spec,
                                         int dim_cap = -1) {
  ClosureReport rep;
  rep.system = control_generators(spec);
  const int n = spec.n_qubits;

  std::vector<OperatorSum> gens;
  if (!rep.system.drift.is_zero()) gens.push_back(rep.system.drift);
  for (const auto& g : rep.system.generators)
    if (!g.is_zero()) gens.push_back(g);
  if (gens.empty())
    throw ContractError("device reaches no nonzero Hamiltonian");

  if (dim_cap < 0) dim_cap = 1 << (2 * n);  // 4^N
  rep.closure = lie_closure(gens, dim_cap);
  rep.traceless_dim = traceless_dimension(rep.closure);

  rep.conserves_number = true;
  rep.conserves_parity = true;
  bool first = true;
  for (const auto& g : gens) {
    rep.conserves_number = rep.conserves_number && conserves(g, Symmetry::Number);
    rep.conserves_parity = rep.conserves_parity && conserves(g, Symmetry::Parity);
    const auto rep_g = grading(g).overall;
    rep.overall = first ? rep_g : grading_join(rep.overall, rep_g);
    first = false;
  }

  const long full = (1L << (2 * n)) - 1;       // dim su(2^N)
  const long parity_bound = 1L << (2 * n - 1);  // parity-even algebra size
  if (rep.traceless_dim >= full) {
    rep.verdict = Verdict::Universal;
  } else if (rep.conserves_parity && rep.closure.dimension < parity_bound) {
    rep.verdict = Verdict::NotUniversal;
  } else {
    rep.verdict = Verdict::UniversalOnSubspaceCandidate;
  }

  if (rep.conserves_number) {
    for (int k = 0; k <= n; ++k) {
      // C(n, k) without overflow at the sizes we support.
      long c = 1;
      for (int t = 1; t <= k; ++t) c = c * (n - t + 1) / t;
      rep.block_dims.push_back(static_cast<int>(c));
    }
  } else if (rep.conserves_parity) {
    rep.block_dims = {1 << (n - 1), 1 << (n - 1)};
  } else {
    rep.block_dims = {1 << n};
  }
  return rep;
}

}  // namespace anex
