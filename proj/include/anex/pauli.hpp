#pragma once

#include <bit>
#include <compare>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include "anex/error.hpp"

namespace anex {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

constexpr char pauli_letter(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

/// A word over {I,X,Y,Z} on n sites. Sites are 1-based; site 1 is the most
/// significant tensor factor. The word itself is phase-free: products of two
/// words pick up a power of i, which multiply() reports separately.
///
/// Stored as two bitmasks (X-type and Z-type, Y = both), so words are capped
/// at 64 sites.
class PauliString {
 public:
  static constexpr int kMaxQubits = 64;

  explicit PauliString(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
      throw DimensionError("qubit count must be in [1, 64], got " +
                           std::to_string(n_qubits));
  }

  PauliString(int n_qubits, std::string_view letters) : PauliString(n_qubits) {
    if (static_cast<int>(letters.size()) != n_qubits)
      throw DimensionError("letter word length " + std::to_string(letters.size()) +
                           " does not match qubit count " + std::to_string(n_qubits));
    for (int s = 1; s <= n_qubits; ++s) {
      switch (letters[s - 1]) {
        case 'I': break;
        case 'X': set(s, Pauli::X); break;
        case 'Y': set(s, Pauli::Y); break;
        case 'Z': set(s, Pauli::Z); break;
        default:
          throw ContractError(std::string("invalid Pauli letter '") + letters[s - 1] + "'");
      }
    }
  }

  int n_qubits() const { return n_; }

  Pauli at(int site) const {
    check_site(site);
    const std::uint64_t m = bit(site);
    const int x = (x_ & m) ? 1 : 0;
    const int z = (z_ & m) ? 1 : 0;
    // (x,z): (0,0)=I (1,0)=X (1,1)=Y (0,1)=Z
    return static_cast<Pauli>(x ? (z ? 2 : 1) : (z ? 3 : 0));
  }

  void set(int site, Pauli p) {
    check_site(site);
    const std::uint64_t m = bit(site);
    x_ &= ~m;
    z_ &= ~m;
    if (p == Pauli::X || p == Pauli::Y) x_ |= m;
    if (p == Pauli::Z || p == Pauli::Y) z_ |= m;
  }

  PauliString with(int site, Pauli p) const {
    PauliString r = *this;
    r.set(site, p);
    return r;
  }

  bool is_identity() const { return (x_ | z_) == 0; }

  /// Number of non-identity sites.
  int weight() const { return std::popcount(x_ | z_); }

  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }

  /// Letter word, e.g. "XIZY" (site 1 first).
  std::string letters() const {
    std::string s(static_cast<std::size_t>(n_), 'I');
    for (int i = 1; i <= n_; ++i) s[i - 1] = pauli_letter(at(i));
    return s;
  }

  /// Factor form, e.g. "X1 Z3"; identity renders as "1".
  std::string str() const {
    if (is_identity()) return "1";
    std::string s;
    for (int i = 1; i <= n_; ++i) {
      const Pauli p = at(i);
      if (p == Pauli::I) continue;
      if (!s.empty()) s += ' ';
      s += pauli_letter(p);
      s += std::to_string(i);
    }
    return s;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) = default;

  /// Canonical order: by qubit count, then lexicographic on the letter word
  /// with I < X < Y < Z.
  std::strong_ordering operator<=>(const PauliString& o) const {
    if (n_ != o.n_) return n_ <=> o.n_;
    if (x_ == o.x_ && z_ == o.z_) return std::strong_ordering::equal;
    for (int s = 1; s <= n_; ++s) {
      const auto a = at(s), b = o.at(s);
      if (a != b) return static_cast<int>(a) <=> static_cast<int>(b);
    }
    return std::strong_ordering::equal;
  }

 private:
  void check_site(int site) const {
    if (site < 1 || site > n_)
      throw DimensionError("site " + std::to_string(site) + " out of range [1, " +
                           std::to_string(n_) + "]");
  }
  static std::uint64_t bit(int site) { return std::uint64_t{1} << (site - 1); }

  int n_;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/// a*b = i^phase_exponent * string, with phase_exponent in {0,1,2,3}.
struct PauliProduct {
  int phase_exponent;
  PauliString string;

  std::complex<double> phase() const {
    static constexpr std::complex<double> kQuartic[4] = {
        {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return kQuartic[phase_exponent & 3];
  }
};

inline PauliProduct multiply(const PauliString& a, const PauliString& b) {
  if (a.n_qubits() != b.n_qubits())
    throw DimensionError("cannot multiply words on " + std::to_string(a.n_qubits()) +
                         " and " + std::to_string(b.n_qubits()) + " qubits");
  // Exponent of i contributed by single-site products, indexed [lhs][rhs]:
  // XY=iZ, YZ=iX, ZX=iY and the reversals pick up i^3.
  static constexpr int kPhase[4][4] = {
      {0, 0, 0, 0},
      {0, 0, 1, 3},
      {0, 3, 0, 1},
      {0, 1, 3, 0}};
  int e = 0;
  std::uint64_t both = (a.x_mask() | a.z_mask()) & (b.x_mask() | b.z_mask());
  while (both) {
    const int site = std::countr_zero(both) + 1;
    both &= both - 1;
    e += kPhase[static_cast<int>(a.at(site))][static_cast<int>(b.at(site))];
  }
  PauliString r(a.n_qubits());
  for (int s = 1; s <= a.n_qubits(); ++s) {
    const int x = ((a.x_mask() ^ b.x_mask()) >> (s - 1)) & 1;
    const int z = ((a.z_mask() ^ b.z_mask()) >> (s - 1)) & 1;
    r.set(s, static_cast<Pauli>(x ? (z ? 2 : 1) : (z ? 3 : 0)));
  }
  return {e & 3, r};
}

inline bool commutes(const PauliString& a, const PauliString& b) {
  // Words commute iff the symplectic form vanishes mod 2.
  const int s = std::popcount(a.x_mask() & b.z_mask()) +
                std::popcount(a.z_mask() & b.x_mask());
  return (s & 1) == 0;
}

}  // namespace anex
