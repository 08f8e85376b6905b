#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "anex/pauli.hpp"

namespace anex {

/// Coefficients with magnitude at or below this are dropped after arithmetic.
inline constexpr double kCoeffEps = 1e-12;

/// Tolerance used when checking hermiticity of inputs.
inline constexpr double kHermitianTol = 1e-9;

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

/// Error-free running sum (nonoverlapping expansion, Shewchuk style). When
/// the mathematical total is representable as a double, round() returns it
/// exactly, not just to the nearest ulp. Used wherever an algebraic rewrite
/// must reproduce its input coefficients bit-for-bit.
class ExactReal {
 public:
  void add(double b) {
    if (b == 0.0) return;
    std::size_t out = 0;
    for (double piece : comp_) {
      const double s = piece + b;
      const double bv = s - piece;
      const double err = (piece - (s - bv)) + (b - bv);
      if (err != 0.0) comp_[out++] = err;
      b = s;
    }
    comp_.resize(out);
    if (b != 0.0) comp_.push_back(b);
  }

  double round() const {
    double q = 0.0;
    for (double piece : comp_) q += piece;  // ascending magnitudes
    return q;
  }

 private:
  std::vector<double> comp_;
};

struct ExactComplex {
  ExactReal re, im;
  void add(std::complex<double> c) {
    re.add(c.real());
    im.add(c.imag());
  }
  std::complex<double> round() const { return {re.round(), im.round()}; }
};

}  // namespace detail

/// Finite sum of Pauli words with complex coefficients, kept in canonical
/// (lexicographic) term order. The zero operator has no terms.
class OperatorSum {
 public:
  using TermMap = std::map<PauliString, std::complex<double>>;

  explicit OperatorSum(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > PauliString::kMaxQubits)
      throw DimensionError("qubit count must be in [1, 64], got " +
                           std::to_string(n_qubits));
  }

  static OperatorSum zero(int n_qubits) { return OperatorSum(n_qubits); }

  static OperatorSum identity(int n_qubits) {
    OperatorSum a(n_qubits);
    a.add(PauliString(n_qubits), 1.0);
    return a;
  }

  /// Single word with coefficient, e.g. term(3, "X1 Z3") via PauliString.
  static OperatorSum term(const PauliString& p, std::complex<double> c) {
    OperatorSum a(p.n_qubits());
    a.add(p, c);
    return a;
  }

  /// Single-site convenience: c * P_site on n qubits.
  static OperatorSum single(int n_qubits, int site, Pauli p,
                            std::complex<double> c = 1.0) {
    return term(PauliString(n_qubits).with(site, p), c);
  }

  int n_qubits() const { return n_; }
  const TermMap& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  std::complex<double> coefficient(const PauliString& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? std::complex<double>{0.0} : it->second;
  }

  void add(const PauliString& p, std::complex<double> c) {
    if (p.n_qubits() != n_)
      throw DimensionError("term on " + std::to_string(p.n_qubits()) +
                           " qubits added to operator on " + std::to_string(n_));
    auto [it, inserted] = terms_.try_emplace(p, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) <= kCoeffEps) terms_.erase(it);
  }

  OperatorSum& operator+=(const OperatorSum& o) {
    check_same(o);
    for (const auto& [p, c] : o.terms_) add(p, c);
    return *this;
  }
  OperatorSum& operator-=(const OperatorSum& o) {
    check_same(o);
    for (const auto& [p, c] : o.terms_) add(p, -c);
    return *this;
  }
  OperatorSum& operator*=(std::complex<double> s) {
    if (std::abs(s) <= kCoeffEps) {
      terms_.clear();
      return *this;
    }
    for (auto& [p, c] : terms_) c *= s;
    return *this;
  }

  friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
  friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) { return a -= b; }
  friend OperatorSum operator*(std::complex<double> s, OperatorSum a) { return a *= s; }
  friend OperatorSum operator*(OperatorSum a, std::complex<double> s) { return a *= s; }

  friend bool operator==(const OperatorSum& a, const OperatorSum& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  /// Adjoint: words are self-adjoint, so only coefficients conjugate.
  OperatorSum adjoint() const {
    OperatorSum r(n_);
    for (const auto& [p, c] : terms_) r.terms_.emplace(p, std::conj(c));
    return r;
  }

  bool is_hermitian(double tol = kHermitianTol) const {
    for (const auto& [p, c] : terms_)
      if (std::abs(c.imag()) > tol) return false;
    return true;
  }

  /// Renders as e.g. "+0.5 X1 X2 -1 Z1"; zero renders as "0". Complex
  /// coefficients render parenthesized: "+(1-0.5i) X1".
  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (const auto& [p, c] : terms_) {
      if (!out.empty()) out += ' ';
      if (std::abs(c.imag()) == 0.0) {
        out += c.real() < 0 ? '-' : '+';
        out += detail::format_double(std::abs(c.real()));
      } else {
        out += "+(";
        out += detail::format_double(c.real());
        out += c.imag() < 0 ? '-' : '+';
        out += detail::format_double(std::abs(c.imag()));
        out += "i)";
      }
      if (!p.is_identity()) {
        out += ' ';
        out += p.str();
      }
    }
    return out;
  }

 private:
  void check_same(const OperatorSum& o) const {
    if (o.n_ != n_)
      throw DimensionError("operator qubit counts differ: " + std::to_string(n_) +
                           " vs " + std::to_string(o.n_));
  }

  int n_;
  TermMap terms_;
};

inline OperatorSum product(const OperatorSum& a, const OperatorSum& b) {
  if (a.n_qubits() != b.n_qubits())
    throw DimensionError("operator qubit counts differ in product");
  OperatorSum r(a.n_qubits());
  for (const auto& [p, c] : a.terms())
    for (const auto& [q, d] : b.terms()) {
      const auto pq = multiply(p, q);
      r.add(pq.string, c * d * pq.phase());
    }
  return r;
}

/// Hermitian-closed commutator -i[A,B]. Both inputs must be Hermitian.
inline OperatorSum bracket(const OperatorSum& a, const OperatorSum& b) {
  if (a.n_qubits() != b.n_qubits())
    throw DimensionError("operator qubit counts differ in bracket");
  if (!a.is_hermitian() || !b.is_hermitian())
    throw ContractError("bracket requires Hermitian inputs");
  OperatorSum r(a.n_qubits());
  for (const auto& [p, c] : a.terms())
    for (const auto& [q, d] : b.terms()) {
      if (commutes(p, q)) continue;
      // pq and qp share a word; for anticommuting words qp = -pq, so
      // [P,Q] = 2 * i^e * PQ and -i[.,.] stays real on real inputs.
      const auto pq = multiply(p, q);
      r.add(pq.string, std::complex<double>(0, -2.0) * c * d * pq.phase());
    }
  return r;
}

inline OperatorSum anticommutator(const OperatorSum& a, const OperatorSum& b) {
  return product(a, b) + product(b, a);
}

/// Normalized Hilbert-Schmidt inner product Tr(A†B) / 2^n. Pauli words are
/// orthonormal under it.
inline std::complex<double> hs_inner(const OperatorSum& a, const OperatorSum& b) {
  if (a.n_qubits() != b.n_qubits())
    throw DimensionError("operator qubit counts differ in hs_inner");
  std::complex<double> s = 0;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  // Walk the smaller map.
  if (ta.size() <= tb.size()) {
    for (const auto& [p, c] : ta) {
      auto it = tb.find(p);
      if (it != tb.end()) s += std::conj(c) * it->second;
    }
  } else {
    for (const auto& [p, c] : tb) {
      auto it = ta.find(p);
      if (it != ta.end()) s += std::conj(it->second) * c;
    }
  }
  return s;
}

inline double hs_norm(const OperatorSum& a) {
  return std::sqrt(std::abs(hs_inner(a, a).real()));
}

/// Canonical comparison for deterministic processing orders: compares the
/// term sequences (word, then coefficient real, then imaginary part).
inline int compare_canonical(const OperatorSum& a, const OperatorSum& b) {
  auto ia = a.terms().begin();
  auto ib = b.terms().begin();
  for (; ia != a.terms().end() && ib != b.terms().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (ia->second.real() != ib->second.real())
      return ia->second.real() < ib->second.real() ? -1 : 1;
    if (ia->second.imag() != ib->second.imag())
      return ia->second.imag() < ib->second.imag() ? -1 : 1;
  }
  if (ia != a.terms().end()) return 1;
  if (ib != b.terms().end()) return -1;
  return 0;
}

namespace detail {

struct TextCursor {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  int col() const { return static_cast<int>(pos) + 1; }
};

inline double parse_number(TextCursor& cur) {
  cur.skip_ws();
  const char* begin = cur.text.data() + cur.pos;
  const char* end = cur.text.data() + cur.text.size();
  double v = 0;
  auto [p, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || p == begin)
    throw ParseError(cur.line, cur.col(), "expected a number");
  cur.pos += static_cast<std::size_t>(p - begin);
  return v;
}

}  // namespace detail

/// Parses the str() rendering back into an operator. n_qubits must be given;
/// words may reference any site in [1, n_qubits].
inline OperatorSum parse_operator(std::string_view text, int n_qubits, int line = 1) {
  OperatorSum out(n_qubits);
  detail::TextCursor cur{text, 0, line};
  cur.skip_ws();
  if (cur.done()) throw ParseError(line, 1, "empty operator");
  std::string_view rest = text.substr(cur.pos);
  while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t')) rest.remove_suffix(1);
  if (rest == "0") return out;
  bool first = true;
  while (true) {
    cur.skip_ws();
    if (cur.done()) break;
    double sign = 1.0;
    if (cur.peek() == '+' || cur.peek() == '-') {
      sign = cur.peek() == '-' ? -1.0 : 1.0;
      ++cur.pos;
    } else if (!first) {
      throw ParseError(cur.line, cur.col(), "expected '+' or '-' between terms");
    }
    first = false;
    cur.skip_ws();
    std::complex<double> coeff;
    if (!cur.done() && cur.peek() == '(') {
      ++cur.pos;
      const double re = detail::parse_number(cur);
      cur.skip_ws();
      if (cur.done() || (cur.peek() != '+' && cur.peek() != '-'))
        throw ParseError(cur.line, cur.col(), "expected sign in complex coefficient");
      const double isign = cur.peek() == '-' ? -1.0 : 1.0;
      ++cur.pos;
      const double im = detail::parse_number(cur);
      cur.skip_ws();
      if (cur.done() || cur.peek() != 'i')
        throw ParseError(cur.line, cur.col(), "expected 'i' in complex coefficient");
      ++cur.pos;
      cur.skip_ws();
      if (cur.done() || cur.peek() != ')')
        throw ParseError(cur.line, cur.col(), "expected ')' after complex coefficient");
      ++cur.pos;
      coeff = sign * std::complex<double>(re, isign * im);
    } else {
      coeff = sign * detail::parse_number(cur);
    }
    PauliString word(n_qubits);
    while (true) {
      cur.skip_ws();
      if (cur.done() || cur.peek() == '+' || cur.peek() == '-' || cur.peek() == '(')
        break;
      const char letter = cur.peek();
      Pauli p;
      switch (letter) {
        case 'X': p = Pauli::X; break;
        case 'Y': p = Pauli::Y; break;
        case 'Z': p = Pauli::Z; break;
        case 'I': p = Pauli::I; break;
        default:
          throw ParseError(cur.line, cur.col(),
                           std::string("unexpected character '") + letter + "'");
      }
      ++cur.pos;
      const int col0 = cur.col();
      int site = 0;
      bool any = false;
      while (!cur.done() && cur.peek() >= '0' && cur.peek() <= '9') {
        site = site * 10 + (cur.peek() - '0');
        ++cur.pos;
        any = true;
      }
      if (!any) throw ParseError(cur.line, col0, "expected site index after Pauli letter");
      if (site < 1 || site > n_qubits)
        throw ParseError(cur.line, col0,
                         "site " + std::to_string(site) + " out of range [1, " +
                             std::to_string(n_qubits) + "]");
      if (word.at(site) != Pauli::I)
        throw ParseError(cur.line, col0, "site " + std::to_string(site) + " repeated in term");
      word.set(site, p);
    }
    out.add(word, coeff);
  }
  return out;
}

}  // namespace anex
