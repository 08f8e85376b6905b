#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <json.hpp>

#include "anex/encoding.hpp"
#include "anex/schedule_io.hpp"
#include "anex/simulator.hpp"
#include "anex/synthesis.hpp"
#include "anex/universality.hpp"
#include "anex/version.hpp"

namespace anex {

using Json = nlohmann::ordered_json;

/// FNV-1a 64-bit digest of the raw input bytes, as 16 hex digits. Used to
/// tie a report to the exact inputs that produced it.
inline std::string input_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return std::string(buf);
}

/// Common report skeleton; `result` and `input_digest` are filled by the
/// command, `diagnostics` collects structured errors and warnings.
inline Json report_envelope(const std::string& command) {
  Json r;
  r["schema_version"] = 1;
  r["tool_version"] = std::string(kVersion);
  r["command"] = command;
  r["input_digest"] = input_digest("");
  r["result"] = nullptr;
  r["diagnostics"] = Json::array();
  return r;
}

/// Sparse state rendering: [index, re, im] triples for amplitudes above the
/// floor, in basis order.
inline Json state_to_json(const Eigen::VectorXcd& amplitudes,
                          double floor = 1e-14) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i)
    if (std::abs(amplitudes(i)) > floor)
      out.push_back(Json::array({static_cast<std::int64_t>(i),
                                 amplitudes(i).real(), amplitudes(i).imag()}));
  return out;
}

inline Json closure_report_to_json(const ClosureReport& rep) {
  Json out;
  Json gens = Json::array();
  for (std::size_t k = 0; k < rep.system.generators.size(); ++k) {
    Json g;
    g["name"] = rep.system.names[k];
    g["operator"] = rep.system.generators[k].str();
    gens.push_back(std::move(g));
  }
  out["drift"] = rep.system.drift.str();
  out["generators"] = std::move(gens);
  out["closure_dimension"] = rep.closure.dimension;
  out["traceless_dimension"] = rep.traceless_dim;
  out["converged"] = rep.closure.converged;
  out["bracket_depth"] = rep.closure.depth;
  out["conserves_number"] = rep.conserves_number;
  out["conserves_parity"] = rep.conserves_parity;
  out["grading"] = grading_name(rep.overall);
  out["has_odd_term"] =
      rep.overall == Grading::Odd || rep.overall == Grading::Mixed;
  out["verdict"] = verdict_name(rep.verdict);
  out["block_dims"] = rep.block_dims;
  return out;
}

inline Json dfs_report_to_json(const DfsReport& rep) {
  Json out;
  out["bath"] = bath_name(rep.bath);
  out["coupling"] = rep.coupling.str();
  out["action_norm"] = rep.action_norm;
  out["annihilates_code"] = rep.annihilates_code;
  out["commutes_with_logic"] = rep.commutes_with_logic;
  out["decoherence_free"] = rep.decoherence_free;
  out["witness"] = rep.witness;
  return out;
}

/// Gate outcome without the dense unitary: scores, conversion relations,
/// and the full control schedule.
inline Json gate_result_to_json(const GateResult& gate) {
  Json out;
  out["fidelity_to_target"] = gate.fidelity_to_target;
  out["leakage"] = gate.leakage;
  out["error_norm"] = gate.error_norm;
  out["step_count"] = gate.step_count;
  out["converged"] = gate.converged;
  Json rel = Json::object();
  for (const auto& [name, value] : gate.relations) rel[name] = value;
  out["relations"] = std::move(rel);
  out["total_duration"] = gate.schedule.total_duration();
  out["schedule"] = schedule_to_json(gate.schedule);
  return out;
}

inline Json measurements_to_json(const std::vector<MeasurementRecord>& records) {
  Json out = Json::array();
  for (const auto& rec : records) {
    Json r;
    r["pair"] = rec.pair;
    r["outcome"] = outcome_name(rec.outcome);
    r["probability"] = rec.probability;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace anex
