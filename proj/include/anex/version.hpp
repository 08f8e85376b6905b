#pragma once

#include <string_view>

namespace anex {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace anex
