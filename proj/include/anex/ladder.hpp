#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "anex/operator_sum.hpp"

namespace anex {

/// Single-site ladder primitives: raising/lowering operators and the two
/// occupation projectors n, (1-n). Conventions: s+ = (X - iY)/2 raises the
/// occupation (s+|0> = |1>), n = (1 - Z)/2.
enum class LadderKind : std::uint8_t { Raise, Lower, Occupied, Empty };

constexpr const char* ladder_symbol(LadderKind k) {
  switch (k) {
    case LadderKind::Raise: return "s+";
    case LadderKind::Lower: return "s-";
    case LadderKind::Occupied: return "n";
    case LadderKind::Empty: return "(1-n)";
  }
  return "?";
}

struct LadderFactor {
  LadderKind kind;
  int site;
  friend bool operator==(const LadderFactor&, const LadderFactor&) = default;
  auto operator<=>(const LadderFactor& o) const {
    if (site != o.site) return site <=> o.site;
    return static_cast<int>(kind) <=> static_cast<int>(o.kind);
  }
};

struct LadderTerm {
  std::complex<double> coeff;
  std::vector<LadderFactor> factors;  // sorted by site, sites distinct

  int raise_count() const {
    return static_cast<int>(std::count_if(factors.begin(), factors.end(),
        [](const LadderFactor& f) { return f.kind == LadderKind::Raise; }));
  }
  int lower_count() const {
    return static_cast<int>(std::count_if(factors.begin(), factors.end(),
        [](const LadderFactor& f) { return f.kind == LadderKind::Lower; }));
  }
};

struct LadderForm {
  int n_qubits;
  std::vector<LadderTerm> terms;
};

/// Rewrites an operator over the ladder primitives. Normal form per site:
/// X -> s+ + s-, Y -> i(s+ - s-), Z -> (1-n) - n. The projector split for Z
/// keeps the factor lists of distinct words disjoint, which is what makes
/// expand(to_ladder(A)) bit-exact for model-shaped operators.
inline LadderForm to_ladder(const OperatorSum& a) {
  struct Piece {
    std::complex<double> c;
    bool has_factor;
    LadderKind kind;
  };
  LadderForm out{a.n_qubits(), {}};
  std::map<std::vector<LadderFactor>, detail::ExactComplex> acc;
  for (const auto& [word, coeff] : a.terms()) {
    std::vector<LadderTerm> partial{{coeff, {}}};
    for (int s = 1; s <= a.n_qubits(); ++s) {
      const Pauli p = word.at(s);
      if (p == Pauli::I) continue;
      std::vector<Piece> pieces;
      switch (p) {
        case Pauli::X:
          pieces = {{1.0, true, LadderKind::Raise}, {1.0, true, LadderKind::Lower}};
          break;
        case Pauli::Y:
          pieces = {{{0, 1}, true, LadderKind::Raise}, {{0, -1}, true, LadderKind::Lower}};
          break;
        case Pauli::Z:
          pieces = {{1.0, true, LadderKind::Empty},
                    {-1.0, true, LadderKind::Occupied}};
          break;
        default: break;
      }
      std::vector<LadderTerm> next;
      next.reserve(partial.size() * pieces.size());
      for (const auto& t : partial)
        for (const auto& piece : pieces) {
          LadderTerm nt = t;
          nt.coeff *= piece.c;
          if (piece.has_factor) nt.factors.push_back({piece.kind, s});
          next.push_back(std::move(nt));
        }
      partial = std::move(next);
    }
    for (auto& t : partial) acc[t.factors].add(t.coeff);
  }
  for (auto& [factors, ec] : acc) {
    const auto c = ec.round();
    if (std::abs(c) <= kCoeffEps) continue;
    out.terms.push_back({c, factors});
  }
  return out;
}

/// Expands a ladder form back to Pauli words. Exact for forms produced by
/// to_ladder (all coefficients are dyadic). Site indices within one term must
/// be distinct.
inline OperatorSum expand(const LadderForm& form) {
  std::map<PauliString, detail::ExactComplex> acc;
  for (const auto& term : form.terms) {
    for (std::size_t i = 0; i < term.factors.size(); ++i) {
      const auto& f = term.factors[i];
      if (f.site < 1 || f.site > form.n_qubits)
        throw DimensionError("ladder factor site " + std::to_string(f.site) +
                             " out of range");
      for (std::size_t j = i + 1; j < term.factors.size(); ++j)
        if (term.factors[j].site == f.site)
          throw ContractError("site " + std::to_string(f.site) +
                              " repeats within a ladder term");
    }
    struct Piece {
      Pauli p;
      std::complex<double> c;
    };
    std::vector<std::pair<PauliString, std::complex<double>>> partial{
        {PauliString(form.n_qubits), term.coeff}};
    for (const auto& f : term.factors) {
      std::vector<Piece> pieces;
      switch (f.kind) {
        case LadderKind::Raise:
          pieces = {{Pauli::X, 0.5}, {Pauli::Y, {0, -0.5}}};
          break;
        case LadderKind::Lower:
          pieces = {{Pauli::X, 0.5}, {Pauli::Y, {0, 0.5}}};
          break;
        case LadderKind::Occupied:
          pieces = {{Pauli::I, 0.5}, {Pauli::Z, -0.5}};
          break;
        case LadderKind::Empty:
          pieces = {{Pauli::I, 0.5}, {Pauli::Z, 0.5}};
          break;
      }
      std::vector<std::pair<PauliString, std::complex<double>>> next;
      next.reserve(partial.size() * 2);
      for (const auto& [word, c] : partial)
        for (const auto& piece : pieces)
          next.emplace_back(word.with(f.site, piece.p), c * piece.c);
      partial = std::move(next);
    }
    for (const auto& [word, c] : partial) acc[word].add(c);
  }
  OperatorSum out(form.n_qubits);
  for (const auto& [word, ec] : acc) out.add(word, ec.round());
  return out;
}

/// Term classification by ladder content: k raising and l lowering factors.
enum class Grading : std::uint8_t {
  NumberConserving,  // k == l in every term
  ParityEven,        // k - l even in every term, not all equal
  Odd,               // k - l odd in every term
  Mixed              // both parities present
};

constexpr const char* grading_name(Grading g) {
  switch (g) {
    case Grading::NumberConserving: return "number-conserving";
    case Grading::ParityEven: return "parity-even";
    case Grading::Odd: return "odd";
    case Grading::Mixed: return "mixed";
  }
  return "?";
}

/// Label for the union of two term sets.
constexpr Grading grading_join(Grading a, Grading b) {
  if (a == b) return a;
  if (a == Grading::Mixed || b == Grading::Mixed) return Grading::Mixed;
  if (a == Grading::NumberConserving)
    return b == Grading::Odd ? Grading::Mixed : b;
  if (b == Grading::NumberConserving)
    return a == Grading::Odd ? Grading::Mixed : a;
  return Grading::Mixed;  // parity-even with odd
}

struct GradingReport {
  LadderForm form;
  std::vector<Grading> per_term;  // aligned with form.terms
  Grading overall = Grading::NumberConserving;
};

/// Classifies each ladder term of A and joins the labels. The zero operator
/// is vacuously number-conserving.
inline GradingReport grading(const OperatorSum& a) {
  GradingReport rep;
  rep.form = to_ladder(a);
  bool any_odd = false, any_even_nonconserving = false, all_conserving = true;
  for (const auto& t : rep.form.terms) {
    const int k = t.raise_count(), l = t.lower_count();
    Grading g;
    if (k == l) {
      g = Grading::NumberConserving;
    } else if (((k - l) % 2) == 0) {
      g = Grading::ParityEven;
      any_even_nonconserving = true;
      all_conserving = false;
    } else {
      g = Grading::Odd;
      any_odd = true;
      all_conserving = false;
    }
    rep.per_term.push_back(g);
  }
  if (all_conserving)
    rep.overall = Grading::NumberConserving;
  else if (!any_odd)
    rep.overall = Grading::ParityEven;
  else if (any_odd && !any_even_nonconserving &&
           std::all_of(rep.per_term.begin(), rep.per_term.end(),
                       [](Grading g) { return g == Grading::Odd; }))
    rep.overall = Grading::Odd;
  else
    rep.overall = Grading::Mixed;
  return rep;
}

}  // namespace anex
