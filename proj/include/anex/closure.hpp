#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <vector>

#include "anex/dense.hpp"
#include "anex/ladder.hpp"
#include "anex/operator_sum.hpp"

namespace anex {

/// Residual threshold for rank decisions in closure computations.
inline constexpr double kClosureResidual = 1e-9;

struct LieBasis {
  std::vector<OperatorSum> elements;  // pairwise orthonormal, Hermitian
  int dimension = 0;
  bool converged = false;
  int depth = 0;  // bracket generations taken
};

/// Thrown when a closure hits its dimension cap; carries the partial result.
class ClosureOverflow : public ResourceError {
 public:
  ClosureOverflow(const std::string& what, LieBasis partial)
      : ResourceError(what), partial(std::move(partial)) {}
  LieBasis partial;
};

namespace detail {

/// Modified Gram-Schmidt step with re-orthogonalization. Returns the
/// normalized residual if it clears the threshold.
inline std::optional<OperatorSum> mgs_residual(const std::vector<OperatorSum>& basis,
                                               OperatorSum v) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : basis) {
      const auto c = hs_inner(e, v);
      if (std::abs(c) > 0) v -= c * e;
    }
  const double r = hs_norm(v);
  if (r <= kClosureResidual) return std::nullopt;
  v *= 1.0 / r;
  return v;
}

inline void sort_canonical(std::vector<OperatorSum>& ops) {
  std::sort(ops.begin(), ops.end(), [](const OperatorSum& a, const OperatorSum& b) {
    return compare_canonical(a, b) < 0;
  });
}

}  // namespace detail

/// Smallest real Lie algebra (under -i[.,.]) containing the span of the
/// generators. Deterministic: generators are normalized and canonically
/// sorted, and each generation's candidates are canonically sorted before
/// rank reduction, so the resulting orthonormal basis does not depend on
/// input order or scaling.
inline LieBasis lie_closure(const std::vector<OperatorSum>& generators, int dim_cap) {
  if (generators.empty()) throw ContractError("lie_closure requires at least one generator");
  if (dim_cap < 1) throw ContractError("dim_cap must be positive");
  const int n = generators.front().n_qubits();
  std::vector<OperatorSum> gens;
  for (const auto& g : generators) {
    if (g.n_qubits() != n)
      throw DimensionError("closure generators act on differing qubit counts");
    if (!g.is_hermitian())
      throw ContractError("closure generators must be Hermitian");
    if (g.is_zero()) continue;
    gens.push_back((1.0 / hs_norm(g)) * g);
  }
  detail::sort_canonical(gens);

  LieBasis out;
  auto admit = [&](const OperatorSum& v) {
    auto res = detail::mgs_residual(out.elements, v);
    if (!res) return false;
    if (out.dimension + 1 > dim_cap) {
      out.converged = false;
      throw ClosureOverflow("lie closure exceeded dimension cap of " +
                                std::to_string(dim_cap),
                            out);
    }
    out.elements.push_back(std::move(*res));
    ++out.dimension;
    return true;
  };

  std::vector<OperatorSum> frontier;
  for (const auto& g : gens)
    if (admit(g)) frontier.push_back(out.elements.back());

  while (!frontier.empty()) {
    ++out.depth;
    std::vector<OperatorSum> candidates;
    for (const auto& g : gens)
      for (const auto& f : frontier) {
        auto c = bracket(g, f);
        if (!c.is_zero()) candidates.push_back(std::move(c));
      }
    detail::sort_canonical(candidates);
    std::vector<OperatorSum> fresh;
    for (auto& c : candidates) {
      c *= 1.0 / hs_norm(c);
      if (admit(c)) fresh.push_back(out.elements.back());
    }
    frontier = std::move(fresh);
  }
  out.converged = true;
  return out;
}

/// Dimension of the traceless part of the span.
inline int traceless_dimension(const LieBasis& basis) {
  if (basis.elements.empty()) return 0;
  const int n = basis.elements.front().n_qubits();
  const PauliString id(n);
  std::vector<OperatorSum> ortho;
  for (const auto& e : basis.elements) {
    OperatorSum t = e;
    t.add(id, -t.coefficient(id));
    if (auto res = detail::mgs_residual(ortho, t)) ortho.push_back(std::move(*res));
  }
  return static_cast<int>(ortho.size());
}

struct AssociativeClosure {
  std::vector<OperatorSum> elements;  // orthonormal over C
  int dimension = 0;
  bool converged = false;
  int depth = 0;
};

/// Smallest unital associative algebra over C containing the generators.
inline AssociativeClosure associative_closure(const std::vector<OperatorSum>& generators,
                                              int dim_cap) {
  if (generators.empty())
    throw ContractError("associative_closure requires at least one generator");
  if (dim_cap < 1) throw ContractError("dim_cap must be positive");
  const int n = generators.front().n_qubits();
  std::vector<OperatorSum> gens;
  for (const auto& g : generators) {
    if (g.n_qubits() != n)
      throw DimensionError("closure generators act on differing qubit counts");
    if (g.is_zero()) continue;
    gens.push_back((1.0 / hs_norm(g)) * g);
  }
  detail::sort_canonical(gens);

  AssociativeClosure out;
  auto admit = [&](const OperatorSum& v) {
    auto res = detail::mgs_residual(out.elements, v);
    if (!res) return false;
    if (out.dimension + 1 > dim_cap)
      throw ResourceError("associative closure exceeded dimension cap of " +
                          std::to_string(dim_cap));
    out.elements.push_back(std::move(*res));
    ++out.dimension;
    return true;
  };

  std::vector<OperatorSum> frontier;
  if (admit(OperatorSum::identity(n))) frontier.push_back(out.elements.back());
  for (const auto& g : gens)
    if (admit(g)) frontier.push_back(out.elements.back());

  while (!frontier.empty()) {
    ++out.depth;
    std::vector<OperatorSum> candidates;
    for (const auto& g : gens)
      for (const auto& f : frontier) {
        auto l = product(g, f);
        if (!l.is_zero()) candidates.push_back(std::move(l));
        auto r = product(f, g);
        if (!r.is_zero()) candidates.push_back(std::move(r));
      }
    detail::sort_canonical(candidates);
    std::vector<OperatorSum> fresh;
    for (auto& c : candidates) {
      c *= 1.0 / hs_norm(c);
      if (admit(c)) fresh.push_back(out.elements.back());
    }
    frontier = std::move(fresh);
  }
  out.converged = true;
  return out;
}

enum class Symmetry { Number, Parity };

/// Total occupation sum_i n_i = N/2 - (1/2) sum_i Z_i.
inline OperatorSum number_operator(int n_qubits) {
  OperatorSum s(n_qubits);
  s.add(PauliString(n_qubits), n_qubits / 2.0);
  for (int i = 1; i <= n_qubits; ++i)
    s.add(PauliString(n_qubits).with(i, Pauli::Z), -0.5);
  return s;
}

/// Occupation parity operator: the all-Z word.
inline OperatorSum parity_operator(int n_qubits) {
  PauliString p(n_qubits);
  for (int i = 1; i <= n_qubits; ++i) p.set(i, Pauli::Z);
  return OperatorSum::term(p, 1.0);
}

/// True iff A commutes with the symmetry generator. For Parity this is
/// equivalent to every ladder term having even k - l; for Number, k == l.
inline bool conserves(const OperatorSum& a, Symmetry which) {
  if (which == Symmetry::Number) {
    const auto s = number_operator(a.n_qubits());
    return (product(a, s) - product(s, a)).is_zero();
  }
  const auto rep = grading(a);
  return rep.overall == Grading::NumberConserving || rep.overall == Grading::ParityEven;
}

struct Sector {
  double label;  // n eigenvalue, or +1/-1 for parity
  std::vector<int> indices;
};

struct BlockDecomposition {
  std::vector<Sector> sectors;
  bool block_diagonal = false;
  double off_block_mass = 0.0;  // Frobenius norm outside the blocks
};

inline BlockDecomposition sector_decompose(const OperatorSum& a, Symmetry which,
                                           int dense_cap = kDefaultDenseCap) {
  check_dense_cap(a.n_qubits(), dense_cap);
  const int n = a.n_qubits();
  const int dim = 1 << n;
  BlockDecomposition out;
  std::vector<int> sector_of(dim);
  if (which == Symmetry::Number) {
    out.sectors.resize(n + 1);
    for (int k = 0; k <= n; ++k) out.sectors[k].label = k;
    for (int b = 0; b < dim; ++b) {
      const int k = std::popcount(static_cast<unsigned>(b));
      out.sectors[k].indices.push_back(b);
      sector_of[b] = k;
    }
  } else {
    out.sectors.resize(2);
    out.sectors[0].label = +1.0;
    out.sectors[1].label = -1.0;
    for (int b = 0; b < dim; ++b) {
      const int s = std::popcount(static_cast<unsigned>(b)) & 1;
      out.sectors[s].indices.push_back(b);
      sector_of[b] = s;
    }
  }
  const Eigen::MatrixXcd m = to_matrix(a, dense_cap);
  double mass = 0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      if (sector_of[r] != sector_of[c]) mass += std::norm(m(r, c));
  out.off_block_mass = std::sqrt(mass);
  out.block_diagonal = out.off_block_mass <= 1e-12;
  return out;
}

struct RestrictedClosure {
  int subspace_dim = 0;
  int dimension = 0;
  bool converged = false;
  int depth = 0;
  int traceless_dim = 0;
  bool full_special_unitary = false;  // traceless_dim == d^2 - 1
  std::vector<Eigen::MatrixXcd> elements;
  Eigen::MatrixXcd isometry;  // columns span range(P)
};

namespace detail {

inline std::optional<Eigen::MatrixXcd> mgs_residual_mat(
    const std::vector<Eigen::MatrixXcd>& basis, Eigen::MatrixXcd v) {
  const double d = static_cast<double>(v.rows());
  auto inner = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a.adjoint() * b).trace() / d;
  };
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : basis) v -= inner(e, v) * e;
  const double r = std::sqrt(std::abs(inner(v, v).real()));
  if (r <= kClosureResidual) return std::nullopt;
  return Eigen::MatrixXcd(v / r);
}

}  // namespace detail

/// Lie closure of the generators compressed onto the range of the projector
/// P. Every generator must preserve that subspace.
inline RestrictedClosure restricted_closure(const std::vector<OperatorSum>& generators,
                                            const Eigen::MatrixXcd& projector,
                                            int dim_cap = -1,
                                            int dense_cap = kDefaultDenseCap) {
  if (generators.empty())
    throw ContractError("restricted_closure requires at least one generator");
  if (projector.rows() != projector.cols())
    throw ContractError("projector must be square");
  if ((projector - projector.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw ContractError("projector must be Hermitian");
  if ((projector * projector - projector).cwiseAbs().maxCoeff() > 1e-10)
    throw ContractError("projector must be idempotent");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(projector);
  int d = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > 0.5) ++d;
  if (d < 2) throw ContractError("projector rank must be at least 2");
  Eigen::MatrixXcd v(projector.rows(), d);
  int col = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > 0.5) v.col(col++) = es.eigenvectors().col(k);

  RestrictedClosure out;
  out.subspace_dim = d;
  out.isometry = v;

  const Eigen::MatrixXcd eye =
      Eigen::MatrixXcd::Identity(projector.rows(), projector.cols());
  std::vector<Eigen::MatrixXcd> gens;
  for (std::size_t gi = 0; gi < generators.size(); ++gi) {
    const auto& g = generators[gi];
    if (!g.is_hermitian())
      throw ContractError("restricted_closure generators must be Hermitian");
    const Eigen::MatrixXcd m = to_matrix(g, dense_cap);
    if (m.rows() != projector.rows())
      throw DimensionError("generator and projector dimensions differ");
    const double leak = ((eye - projector) * m * projector).norm();
    if (leak > 1e-10 * std::max(1.0, m.norm()))
      throw ContractError("generator " + std::to_string(gi + 1) +
                          " does not preserve the subspace (leak " +
                          detail::format_double(leak) + ")");
    Eigen::MatrixXcd r = v.adjoint() * m * v;
    r = Eigen::MatrixXcd((r + r.adjoint()) / 2.0);
    if (r.norm() > kClosureResidual) gens.push_back(std::move(r));
  }
  if (dim_cap < 1) dim_cap = d * d;

  auto admit = [&](const Eigen::MatrixXcd& m) {
    auto res = detail::mgs_residual_mat(out.elements, m);
    if (!res) return false;
    if (out.dimension + 1 > dim_cap)
      throw ResourceError("restricted closure exceeded dimension cap of " +
                          std::to_string(dim_cap));
    out.elements.push_back(std::move(*res));
    ++out.dimension;
    return true;
  };

  std::vector<Eigen::MatrixXcd> frontier;
  for (const auto& g : gens)
    if (admit(g / std::sqrt(std::abs((g.adjoint() * g).trace().real() / d))))
      frontier.push_back(out.elements.back());

  const std::complex<double> mi(0, -1);
  while (!frontier.empty()) {
    ++out.depth;
    std::vector<Eigen::MatrixXcd> fresh;
    for (const auto& g : gens)
      for (const auto& f : frontier) {
        Eigen::MatrixXcd c = mi * (g * f - f * g);
        const double nrm = std::sqrt(std::abs((c.adjoint() * c).trace().real() / d));
        if (nrm <= kClosureResidual) continue;
        if (admit(c / nrm)) fresh.push_back(out.elements.back());
      }
    frontier = std::move(fresh);
  }
  out.converged = true;

  const Eigen::MatrixXcd small_eye = Eigen::MatrixXcd::Identity(d, d);
  std::vector<Eigen::MatrixXcd> traceless;
  for (const auto& e : out.elements) {
    const Eigen::MatrixXcd t = e - (e.trace() / static_cast<double>(d)) * small_eye;
    if (auto res = detail::mgs_residual_mat(traceless, t))
      traceless.push_back(std::move(*res));
  }
  out.traceless_dim = static_cast<int>(traceless.size());
  out.full_special_unitary = out.traceless_dim == d * d - 1;
  return out;
}

/// V† M V for the matrix of A, with V an isometry whose columns span the
/// target subspace.
inline Eigen::MatrixXcd restrict_matrix(const Eigen::MatrixXcd& isometry,
                                        const OperatorSum& a,
                                        int dense_cap = kDefaultDenseCap) {
  const Eigen::MatrixXcd m = to_matrix(a, dense_cap);
  if (m.rows() != isometry.rows())
    throw DimensionError("isometry and operator dimensions differ");
  return isometry.adjoint() * m * isometry;
}

}  // namespace anex
