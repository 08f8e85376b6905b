#pragma once

#include <charconv>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anex/model.hpp"

namespace anex {
namespace detail {

/// One whitespace-separated token with its starting column (1-based).
struct Token {
  std::string_view text;
  int col;
};

inline std::vector<Token> tokenize_line(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#')
      ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

inline int dsl_int(const Token& t, int line) {
  int v = 0;
  auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc{} || p != t.text.data() + t.text.size())
    throw ParseError(line, t.col, "expected an integer, got '" + std::string(t.text) + "'");
  return v;
}

inline double dsl_real(std::string_view text, int line, int col) {
  double v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw ParseError(line, col, "expected a real number, got '" + std::string(text) + "'");
  return v;
}

/// key=value field; returns the value, enforcing the expected key.
struct FieldSet {
  int line;
  std::set<std::string_view> seen;

  double take(const Token& t, std::string_view key) {
    const auto eq = t.text.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(line, t.col, "expected " + std::string(key) + "=VALUE");
    const auto k = t.text.substr(0, eq);
    if (k != key)
      throw ParseError(line, t.col, "expected field '" + std::string(key) +
                                        "', got '" + std::string(k) + "'");
    if (!seen.insert(k).second)
      throw ParseError(line, t.col, "duplicate field '" + std::string(k) + "'");
    return dsl_real(t.text.substr(eq + 1), line, t.col + static_cast<int>(eq) + 1);
  }
};

}  // namespace detail

/// Parses the line-oriented device description:
///   qubits N
///   qubit I eps=R [fx=R fy=R]
///   bond I J Jx=R Jy=R Jz=R
///   dm I J dx=R dy=R dz=R
///   control NAME...
/// Indices are 1-based; '#' starts a comment. The `qubits` line must come
/// before any line that references a site.
inline HamiltonianSpec parse_spec(std::string_view text) {
  HamiltonianSpec spec;
  bool have_qubits = false;
  std::set<std::pair<int, int>> bond_seen, dm_seen;
  std::vector<std::pair<std::string, std::pair<int, int>>> control_names;  // name, loc

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                    : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    const auto tokens = detail::tokenize_line(line);
    if (tokens.empty()) continue;
    const auto& head = tokens[0];

    auto need = [&](std::size_t count, const char* what) {
      if (tokens.size() != count)
        throw ParseError(line_no, head.col,
                         std::string(head.text) + " needs " + what);
    };
    auto site_index = [&](const detail::Token& t) {
      const int v = detail::dsl_int(t, line_no);
      if (v < 1 || v > spec.n_qubits)
        throw ParseError(line_no, t.col,
                         "site " + std::to_string(v) + " outside [1, " +
                             std::to_string(spec.n_qubits) + "]");
      return v;
    };
    auto require_header = [&] {
      if (!have_qubits)
        throw ParseError(line_no, head.col, "'qubits N' must come first");
    };

    if (head.text == "qubits") {
      if (have_qubits)
        throw ParseError(line_no, head.col, "duplicate 'qubits' line");
      need(2, "one integer");
      const int n = detail::dsl_int(tokens[1], line_no);
      if (n < 1 || n > PauliString::kMaxQubits)
        throw ParseError(line_no, tokens[1].col, "qubit count out of range");
      spec.n_qubits = n;
      spec.eps.assign(n, 0.0);
      spec.fx.assign(n, 0.0);
      spec.fy.assign(n, 0.0);
      have_qubits = true;
    } else if (head.text == "qubit") {
      require_header();
      if (tokens.size() < 3 || tokens.size() > 5)
        throw ParseError(line_no, head.col, "qubit needs INDEX eps=R [fx=R fy=R]");
      const int i = site_index(tokens[1]);
      detail::FieldSet fields{line_no, {}};
      spec.eps[i - 1] = fields.take(tokens[2], "eps");
      if (tokens.size() > 3) spec.fx[i - 1] = fields.take(tokens[3], "fx");
      if (tokens.size() > 4) spec.fy[i - 1] = fields.take(tokens[4], "fy");
    } else if (head.text == "bond" || head.text == "dm") {
      require_header();
      const bool is_bond = head.text == "bond";
      need(6, is_bond ? "I J Jx=R Jy=R Jz=R" : "I J dx=R dy=R dz=R");
      const int i = site_index(tokens[1]);
      const int j = site_index(tokens[2]);
      if (i >= j)
        throw ParseError(line_no, tokens[1].col,
                         "indices must satisfy i < j, got " + std::to_string(i) +
                             " " + std::to_string(j));
      auto& seen = is_bond ? bond_seen : dm_seen;
      if (!seen.insert({i, j}).second)
        throw ParseError(line_no, tokens[1].col,
                         "duplicate " + std::string(head.text) + " " +
                             std::to_string(i) + " " + std::to_string(j));
      detail::FieldSet fields{line_no, {}};
      if (is_bond) {
        Coupling c{i, j, 0, 0, 0};
        c.jx = fields.take(tokens[3], "Jx");
        c.jy = fields.take(tokens[4], "Jy");
        c.jz = fields.take(tokens[5], "Jz");
        spec.couplings.push_back(c);
      } else {
        DmVector d{i, j, 0, 0, 0};
        d.dx = fields.take(tokens[3], "dx");
        d.dy = fields.take(tokens[4], "dy");
        d.dz = fields.take(tokens[5], "dz");
        spec.dm.push_back(d);
      }
    } else if (head.text == "control") {
      require_header();
      if (tokens.size() < 2)
        throw ParseError(line_no, head.col, "control needs at least one name");
      for (std::size_t k = 1; k < tokens.size(); ++k)
        control_names.push_back({std::string(tokens[k].text), {line_no, tokens[k].col}});
    } else {
      throw ParseError(line_no, head.col,
                       "unknown directive '" + std::string(head.text) + "'");
    }
  }
  if (!have_qubits) throw ParseError(1, 1, "missing 'qubits N' line");

  for (const auto& [name, loc] : control_names) {
    try {
      validate_param_name(spec, name);
    } catch (const ContractError& e) {
      throw ParseError(loc.first, loc.second, e.what());
    }
    spec.controllable.push_back(name);
  }
  std::sort(spec.controllable.begin(), spec.controllable.end());
  spec.controllable.erase(
      std::unique(spec.controllable.begin(), spec.controllable.end()),
      spec.controllable.end());
  return spec;
}

/// Renders a device description; parse_spec(render_spec(s)) reproduces s.
inline std::string render_spec(const HamiltonianSpec& spec) {
  std::string out = "qubits " + std::to_string(spec.n_qubits) + "\n";
  for (int i = 1; i <= spec.n_qubits; ++i) {
    const double e = spec.eps[i - 1], x = spec.fx[i - 1], y = spec.fy[i - 1];
    if (e == 0.0 && x == 0.0 && y == 0.0) continue;
    out += "qubit " + std::to_string(i) + " eps=" + detail::format_double(e);
    if (x != 0.0 || y != 0.0) out += " fx=" + detail::format_double(x);
    if (y != 0.0) out += " fy=" + detail::format_double(y);
    out += "\n";
  }
  for (const auto& c : spec.couplings)
    out += "bond " + std::to_string(c.i) + " " + std::to_string(c.j) +
           " Jx=" + detail::format_double(c.jx) +
           " Jy=" + detail::format_double(c.jy) +
           " Jz=" + detail::format_double(c.jz) + "\n";
  for (const auto& d : spec.dm)
    out += "dm " + std::to_string(d.i) + " " + std::to_string(d.j) +
           " dx=" + detail::format_double(d.dx) +
           " dy=" + detail::format_double(d.dy) +
           " dz=" + detail::format_double(d.dz) + "\n";
  if (!spec.controllable.empty()) {
    out += "control";
    for (const auto& name : spec.controllable) out += " " + name;
    out += "\n";
  }
  return out;
}

}  // namespace anex
