#include <catch2/catch_amalgamated.hpp>

#include "anex/closure.hpp"
#include "anex/dsl.hpp"
#include "anex/universality.hpp"
#include "oracle.hpp"

using namespace anex;
using oracle::cd;

namespace {

OperatorSum from_terms(int n, const std::vector<std::pair<std::string, cd>>& terms) {
  OperatorSum a(n);
  for (const auto& [w, c] : terms) a.add(PauliString(n, w), c);
  return a;
}

std::vector<Eigen::MatrixXcd> densify(const std::vector<OperatorSum>& ops) {
  std::vector<Eigen::MatrixXcd> out;
  for (const auto& o : ops) out.push_back(to_matrix(o));
  return out;
}

// Pair ladder words: plus(i) = (X_i - i Y_i)/2 raises site i.
OperatorSum site_plus(int n, int i) {
  OperatorSum a(n);
  a.add(PauliString(n).with(i, Pauli::X), 0.5);
  a.add(PauliString(n).with(i, Pauli::Y), cd(0, -0.5));
  return a;
}
OperatorSum site_minus(int n, int i) {
  OperatorSum a(n);
  a.add(PauliString(n).with(i, Pauli::X), 0.5);
  a.add(PauliString(n).with(i, Pauli::Y), cd(0, 0.5));
  return a;
}

// Dense projector onto the span of the given computational basis states.
Eigen::MatrixXcd basis_projector(int n, const std::vector<int>& kets) {
  const int dim = 1 << n;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k : kets) p(k, k) = 1.0;
  return p;
}

// Basis index of a bit pattern written site-first ("0101" -> site 1 is '0').
int ket(const std::string& bits) {
  int v = 0;
  for (char b : bits) v = (v << 1) | (b - '0');
  return v;
}

}  // namespace

TEST_CASE("single-qubit X and Z close into the full traceless algebra") {
  const auto x = from_terms(1, {{"X", 1}});
  const auto z = from_terms(1, {{"Z", 1}});
  const auto basis = lie_closure({x, z}, 16);
  CHECK(basis.dimension == 3);
  CHECK(basis.converged);
  CHECK(basis.dimension == oracle::lie_closure_dim(densify({x, z})));
  // Orthonormality of the reported basis.
  for (std::size_t a = 0; a < basis.elements.size(); ++a)
    for (std::size_t b = 0; b < basis.elements.size(); ++b) {
      const auto g = hs_inner(basis.elements[a], basis.elements[b]);
      CHECK(std::abs(g - (a == b ? 1.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("axially symmetric controls close on a five-dimensional algebra") {
  const auto gens = std::vector<OperatorSum>{
      from_terms(2, {{"ZI", 1}}),
      from_terms(2, {{"IZ", 1}}),
      from_terms(2, {{"XX", 0.5}, {"YY", 0.5}}),
      from_terms(2, {{"ZZ", 1}}),
  };
  const auto basis = lie_closure(gens, 256);
  CHECK(basis.dimension == 5);
  CHECK(basis.dimension == oracle::lie_closure_dim(densify(gens)));
}

TEST_CASE("adding the anisotropy direction grows the algebra to seven") {
  const auto gens = std::vector<OperatorSum>{
      from_terms(2, {{"ZI", 1}}),
      from_terms(2, {{"IZ", 1}}),
      from_terms(2, {{"XX", 0.5}, {"YY", 0.5}}),
      from_terms(2, {{"XX", 0.5}, {"YY", -0.5}}),
      from_terms(2, {{"ZZ", 1}}),
  };
  const auto basis = lie_closure(gens, 256);
  CHECK(basis.dimension == 7);
  CHECK(basis.dimension == oracle::lie_closure_dim(densify(gens)));
  // Everything generated from parity-even inputs stays parity even.
  for (const auto& e : basis.elements) {
    const auto g = grading(e).overall;
    CHECK((g == Grading::NumberConserving || g == Grading::ParityEven));
  }
}

TEST_CASE("cross term plus isotropic exchange plus local Z reaches su(4)") {
  const auto dm = from_terms(2, {{"YZ", 1}, {"ZY", -1}});
  const auto heis = from_terms(2, {{"XX", 1}, {"YY", 1}, {"ZZ", 1}});
  const auto gens = std::vector<OperatorSum>{
      dm, heis, from_terms(2, {{"ZI", 1}}), from_terms(2, {{"IZ", 1}})};
  const auto basis = lie_closure(gens, 256);
  CHECK(basis.dimension == 15);
  CHECK(traceless_dimension(basis) == 15);
  CHECK(basis.dimension == oracle::lie_closure_dim(densify(gens)));
}

TEST_CASE("nested commutators rebuild a single-site Y from the cross term") {
  // [[YZ - ZY, isotropic exchange], Z1] composed with raw commutators.
  const auto dm = from_terms(2, {{"YZ", 1}, {"ZY", -1}});
  const auto heis = from_terms(2, {{"XX", 1}, {"YY", 1}, {"ZZ", 1}});
  const auto z1 = from_terms(2, {{"ZI", 1}});
  auto comm = [](const OperatorSum& a, const OperatorSum& b) {
    return product(a, b) - product(b, a);
  };
  const auto nested = 0.5 * comm(comm(dm, heis), z1);
  // The result is a pure multiple of Y1; the engine-computed scale is 4.
  OperatorSum residue = nested;
  const auto y1 = PauliString(2, "YI");
  const cd scale = nested.coefficient(y1);
  residue.add(y1, -scale);
  CHECK(residue.is_zero());
  CHECK(std::abs(scale - cd(4.0, 0)) <= 1e-12);
  // Dense oracle agreement for the whole nested expression.
  const Eigen::MatrixXcd m =
      0.5 * oracle::commutator(oracle::commutator(to_matrix(dm), to_matrix(heis)),
                               to_matrix(z1));
  CHECK((to_matrix(nested) - m).norm() < 1e-12);
}

TEST_CASE("closure dimension survives permutation and rescaling") {
  const auto gens = std::vector<OperatorSum>{
      from_terms(2, {{"ZI", 1}}),
      from_terms(2, {{"XX", 0.5}, {"YY", 0.5}}),
      from_terms(2, {{"ZZ", 1}}),
      from_terms(2, {{"IZ", 1}}),
  };
  const auto a = lie_closure(gens, 256);
  auto scrambled = std::vector<OperatorSum>{
      (-3.0) * gens[2], gens[3], 0.25 * gens[1], gens[0] * 2.0};
  const auto b = lie_closure(scrambled, 256);
  REQUIRE(a.dimension == b.dimension);
  // Same span: every element of one basis lies in the other.
  for (const auto& e : a.elements) {
    OperatorSum r = e;
    for (const auto& f : b.elements) r -= hs_inner(f, e) * f;
    CHECK(hs_norm(r) < 1e-9);
  }
  // Identical generator lists give byte-identical bases.
  const auto c = lie_closure(gens, 256);
  REQUIRE(c.dimension == a.dimension);
  for (int k = 0; k < a.dimension; ++k)
    CHECK(c.elements[k].str() == a.elements[k].str());
}

TEST_CASE("dimension cap aborts with the partial basis attached") {
  const auto x = from_terms(1, {{"X", 1}});
  const auto z = from_terms(1, {{"Z", 1}});
  try {
    lie_closure({x, z}, 2);
    FAIL("expected ClosureOverflow");
  } catch (const ClosureOverflow& e) {
    CHECK(e.partial.dimension == 2);
    CHECK_FALSE(e.partial.converged);
    CHECK(e.partial.elements.size() == 2);
  }
}

TEST_CASE("three-site exchange chain with fields closes on su(8)") {
  std::vector<OperatorSum> gens;
  for (int i = 1; i <= 3; ++i) {
    gens.push_back(OperatorSum::single(3, i, Pauli::Z));
    gens.push_back(OperatorSum::single(3, i, Pauli::X));
  }
  for (int i = 1; i <= 2; ++i) {
    OperatorSum bond(3);
    bond.add(PauliString(3).with(i, Pauli::X).with(i + 1, Pauli::X), 1.0);
    bond.add(PauliString(3).with(i, Pauli::Y).with(i + 1, Pauli::Y), 1.0);
    bond.add(PauliString(3).with(i, Pauli::Z).with(i + 1, Pauli::Z), 1.0);
    gens.push_back(bond);
  }
  const auto basis = lie_closure(gens, 256);
  CHECK(basis.dimension == 63);
  CHECK(traceless_dimension(basis) == 63);
}

TEST_CASE("hopping words generate the number-conserving algebra") {
  // {s_i^+ s_j^-} with i = j allowed: n_i plus both hopping directions.
  std::vector<OperatorSum> gens;
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j)
      gens.push_back(product(site_plus(2, i), site_minus(2, j)));
  const auto alg = associative_closure(gens, 64);
  CHECK(alg.dimension == 6);  // (2N)!/(N!N!) at N = 2
  CHECK(alg.converged);

  // Same family at N = 3.
  std::vector<OperatorSum> gens3;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      gens3.push_back(product(site_plus(3, i), site_minus(3, j)));
  CHECK(associative_closure(gens3, 128).dimension == 20);
}

TEST_CASE("adding pair terms grows the algebra to the parity-even size") {
  std::vector<OperatorSum> gens;
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) {
      gens.push_back(product(site_plus(2, i), site_minus(2, j)));
      if (i != j) {
        gens.push_back(product(site_plus(2, i), site_plus(2, j)));
        gens.push_back(product(site_minus(2, i), site_minus(2, j)));
      }
    }
  const auto alg = associative_closure(gens, 64);
  CHECK(alg.dimension == 8);  // 2^{2N}/2 at N = 2

  // Single-site ladder words break parity and give the full matrix algebra.
  auto widened = gens;
  widened.push_back(site_plus(2, 1));
  widened.push_back(site_minus(2, 1));
  widened.push_back(site_plus(2, 2));
  widened.push_back(site_minus(2, 2));
  CHECK(associative_closure(widened, 64).dimension == 16);
}

TEST_CASE("lie closure never outruns the associative closure") {
  const auto sets = std::vector<std::vector<OperatorSum>>{
      {from_terms(2, {{"ZI", 1}}), from_terms(2, {{"XX", 0.5}, {"YY", 0.5}})},
      {from_terms(2, {{"XI", 1}}), from_terms(2, {{"ZZ", 1}})},
      {from_terms(1, {{"X", 1}}), from_terms(1, {{"Z", 1}})},
  };
  for (const auto& gens : sets) {
    const int n = gens.front().n_qubits();
    const int lie = lie_closure(gens, 300).dimension;
    const int assoc = associative_closure(gens, 300).dimension;
    CHECK(lie <= assoc);
    CHECK(assoc <= (1 << (2 * n)));
  }
}

TEST_CASE("symmetry checks match the ladder grading") {
  const auto tx = from_terms(2, {{"XX", 0.5}, {"YY", 0.5}});
  const auto rx = from_terms(2, {{"XX", 0.5}, {"YY", -0.5}});
  const auto x1 = from_terms(2, {{"XI", 1}});
  CHECK(conserves(tx, Symmetry::Number));
  CHECK(conserves(tx, Symmetry::Parity));
  CHECK_FALSE(conserves(rx, Symmetry::Number));
  CHECK(conserves(rx, Symmetry::Parity));
  CHECK_FALSE(conserves(x1, Symmetry::Parity));
  CHECK_FALSE(conserves(x1, Symmetry::Number));

  // Dense cross-check: commutation with the dense symmetry generators.
  const auto n_op = to_matrix(number_operator(2));
  const auto p_op = to_matrix(parity_operator(2));
  CHECK(oracle::commutator(to_matrix(tx), n_op).norm() < 1e-14);
  CHECK(oracle::commutator(to_matrix(rx), n_op).norm() > 0.1);
  CHECK(oracle::commutator(to_matrix(rx), p_op).norm() < 1e-14);
  CHECK(oracle::commutator(to_matrix(x1), p_op).norm() > 0.1);
}

TEST_CASE("sector decomposition identifies parity blocks") {
  const auto decomp = sector_decompose(from_terms(2, {{"XX", 1}, {"YY", 0.5}}),
                                       Symmetry::Parity);
  REQUIRE(decomp.sectors.size() == 2);
  CHECK(decomp.sectors[0].indices == std::vector<int>{ket("00"), ket("11")});
  CHECK(decomp.sectors[1].indices == std::vector<int>{ket("01"), ket("10")});
  CHECK(decomp.block_diagonal);

  // A transverse field couples the parity sectors.
  const auto leaky = sector_decompose(from_terms(2, {{"XI", 0.3}, {"ZZ", 1}}),
                                      Symmetry::Parity);
  CHECK_FALSE(leaky.block_diagonal);
  CHECK(leaky.off_block_mass > 0.1);

  // Number sectors at N = 2 come out as dimensions 1, 2, 1.
  const auto num = sector_decompose(from_terms(2, {{"ZI", 1}, {"ZZ", 0.5}}),
                                    Symmetry::Number);
  REQUIRE(num.sectors.size() == 3);
  CHECK(num.sectors[0].indices.size() == 1);
  CHECK(num.sectors[1].indices.size() == 2);
  CHECK(num.sectors[2].indices.size() == 1);
  CHECK(num.block_diagonal);
}

TEST_CASE("restricted closure flags full control on the code space") {
  // Four sites, logical pair words on sites (1,2) and (3,4).
  const int n = 4;
  const auto txm = [&](int a, int b) {
    OperatorSum t(n);
    t.add(PauliString(n).with(a, Pauli::X).with(b, Pauli::X), 0.5);
    t.add(PauliString(n).with(a, Pauli::Y).with(b, Pauli::Y), 0.5);
    return t;
  };
  const auto rxm = [&](int a, int b) {
    OperatorSum t(n);
    t.add(PauliString(n).with(a, Pauli::X).with(b, Pauli::X), 0.5);
    t.add(PauliString(n).with(a, Pauli::Y).with(b, Pauli::Y), -0.5);
    return t;
  };
  const auto zdiff = [&](int a, int b) {
    OperatorSum t(n);
    t.add(PauliString(n).with(a, Pauli::Z), 1.0);
    t.add(PauliString(n).with(b, Pauli::Z), -1.0);
    return t;
  };
  const auto zsum = [&](int a, int b) {
    OperatorSum t(n);
    t.add(PauliString(n).with(a, Pauli::Z), 1.0);
    t.add(PauliString(n).with(b, Pauli::Z), 1.0);
    return t;
  };
  const auto zz23 = from_terms(n, {{"IZZI", 1}});

  SECTION("single-occupation pair words") {
    const auto p = basis_projector(
        n, {ket("0101"), ket("0110"), ket("1001"), ket("1010")});
    const auto rc = restricted_closure(
        {zdiff(1, 2), txm(1, 2), zdiff(3, 4), txm(3, 4), zz23}, p);
    CHECK(rc.subspace_dim == 4);
    CHECK(rc.traceless_dim == 15);
    CHECK(rc.full_special_unitary);
  }
  SECTION("equal-occupation pair words") {
    const auto p = basis_projector(
        n, {ket("0000"), ket("0011"), ket("1100"), ket("1111")});
    const auto rc = restricted_closure(
        {zsum(1, 2), rxm(1, 2), zsum(3, 4), rxm(3, 4), zz23}, p);
    CHECK(rc.subspace_dim == 4);
    CHECK(rc.traceless_dim == 15);
    CHECK(rc.full_special_unitary);
  }
  SECTION("one abelian generator is not enough") {
    const int m = 2;
    OperatorSum zd(m);
    zd.add(PauliString(m).with(1, Pauli::Z), 1.0);
    zd.add(PauliString(m).with(2, Pauli::Z), -1.0);
    const auto p = basis_projector(m, {ket("01"), ket("10")});
    const auto rc = restricted_closure({zd}, p);
    CHECK(rc.subspace_dim == 2);
    CHECK(rc.dimension == 1);
    CHECK_FALSE(rc.full_special_unitary);
  }
  SECTION("a leaking generator is named") {
    const auto p = basis_projector(
        n, {ket("0101"), ket("0110"), ket("1001"), ket("1010")});
    // A bare X flips one site and exits the pair-word span: it leaks.
    try {
      restricted_closure({zdiff(1, 2), from_terms(n, {{"XIII", 1}})}, p);
      FAIL("expected ContractError");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("generator 2") != std::string::npos);
    }
    // A pair raise/lower term restricts to zero here without leaking.
    CHECK_NOTHROW(restricted_closure({zdiff(1, 2), rxm(1, 2)}, p));
  }
}

TEST_CASE("universality report classifies the three device families") {
  SECTION("transverse field present: fully universal") {
    const auto spec = parse_spec(
        "qubits 2\n"
        "qubit 1 eps=1 fx=0.5\n"
        "qubit 2 eps=0.25\n"
        "bond 1 2 Jx=1 Jy=0.5 Jz=0.25\n"
        "control eps1 J1_2\n");
    const auto rep = universality_report(spec);
    CHECK(rep.verdict == Verdict::Universal);
    CHECK(rep.traceless_dim == 15);
    CHECK_FALSE(rep.conserves_parity);
    CHECK(rep.overall == Grading::Mixed);
    CHECK(rep.block_dims == std::vector<int>{4});
  }
  SECTION("axially symmetric field-free device: not universal") {
    const auto spec = parse_spec(
        "qubits 2\n"
        "qubit 1 eps=1\n"
        "qubit 2 eps=0.25\n"
        "bond 1 2 Jx=0.5 Jy=0.5 Jz=0.25\n"
        "control eps1 eps2 J1_2 Jz1_2\n");
    const auto rep = universality_report(spec);
    CHECK(rep.verdict == Verdict::NotUniversal);
    CHECK(rep.conserves_number);
    CHECK(rep.conserves_parity);
    CHECK(rep.block_dims == std::vector<int>{1, 2, 1});
    CHECK(rep.closure.dimension == 5);
  }
  SECTION("cross-coupling vector restores universality without fields") {
    const auto spec = parse_spec(
        "qubits 2\n"
        "qubit 1 eps=1\n"
        "qubit 2 eps=0.25\n"
        "bond 1 2 Jx=1 Jy=1 Jz=1\n"
        "dm 1 2 dx=0.01 dy=0 dz=0\n"
        "control eps1 eps2 Jh1_2 dx1_2\n");
    const auto rep = universality_report(spec);
    CHECK(rep.verdict == Verdict::Universal);
    CHECK(rep.traceless_dim == 15);
    // The cross-coupling x component is the odd term that unlocks the
    // full algebra without any transverse field.
    CHECK_FALSE(rep.conserves_parity);
    CHECK(rep.overall == Grading::Mixed);
    CHECK(rep.block_dims == std::vector<int>{4});
  }
}

TEST_CASE("control directions are extracted alias-aware") {
  const auto spec = parse_spec(
      "qubits 2\n"
      "qubit 1 eps=1\n"
      "bond 1 2 Jx=0.75 Jy=0.25 Jz=0.5\n"
      "control J1_2 eps1\n");
  const auto sys = control_generators(spec);
  REQUIRE(sys.names == std::vector<std::string>{"J1_2", "eps1"});
  // Drift keeps the fixed anisotropy (Delta = 0.5) and Jz; J is zeroed.
  CHECK(sys.drift.coefficient(PauliString(2, "XX")) == cd{0.25, 0});
  CHECK(sys.drift.coefficient(PauliString(2, "YY")) == cd{-0.25, 0});
  CHECK(sys.drift.coefficient(PauliString(2, "ZZ")) == cd{0.5, 0});
  CHECK(sys.drift.coefficient(PauliString(2, "ZI")) == cd{0.0, 0});
  // The J direction is (XX + YY)/2; eps direction is Z/2.
  CHECK(hs_norm(sys.generators[0] -
                from_terms(2, {{"XX", 0.5}, {"YY", 0.5}})) == 0.0);
  CHECK(hs_norm(sys.generators[1] - from_terms(2, {{"ZI", 0.5}})) == 0.0);
}
