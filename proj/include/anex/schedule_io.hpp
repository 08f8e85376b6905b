#pragma once

#include <string>

#include <json.hpp>

#include "anex/model.hpp"

namespace anex {

/// Schedule wire format:
///   {"segments": [{"assignments": {"J1_2": 1.0, ...}, "duration": 0.5}, ...]}
inline nlohmann::ordered_json schedule_to_json(const ControlSchedule& sched) {
  nlohmann::ordered_json out;
  out["segments"] = nlohmann::ordered_json::array();
  for (const auto& seg : sched.segments) {
    nlohmann::ordered_json js;
    js["assignments"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : seg.assignments) js["assignments"][name] = value;
    js["duration"] = seg.duration;
    out["segments"].push_back(std::move(js));
  }
  return out;
}

inline ControlSchedule schedule_from_json(const nlohmann::json& js) {
  if (!js.is_object() || !js.contains("segments") || !js["segments"].is_array())
    throw ParseError(1, 1, "schedule must be an object with a 'segments' array");
  ControlSchedule sched;
  for (const auto& seg_js : js["segments"]) {
    if (!seg_js.is_object() || !seg_js.contains("duration") ||
        !seg_js["duration"].is_number())
      throw ParseError(1, 1, "each segment needs a numeric 'duration'");
    Segment seg;
    seg.duration = seg_js["duration"].get<double>();
    if (seg_js.contains("assignments")) {
      if (!seg_js["assignments"].is_object())
        throw ParseError(1, 1, "'assignments' must be an object");
      for (const auto& [name, value] : seg_js["assignments"].items()) {
        if (!value.is_number())
          throw ParseError(1, 1, "assignment '" + name + "' must be a number");
        seg.assignments[name] = value.get<double>();
      }
    }
    sched.segments.push_back(std::move(seg));
  }
  return sched;
}

inline std::string schedule_to_string(const ControlSchedule& sched) {
  return schedule_to_json(sched).dump(2) + "\n";
}

inline ControlSchedule schedule_from_string(const std::string& text) {
  nlohmann::json js;
  try {
    js = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, 1, std::string("invalid JSON: ") + e.what());
  }
  return schedule_from_json(js);
}

}  // namespace anex
