#pragma once

#include <array>
#include <utility>

namespace atomlight {

inline constexpr const char* version = "0.1.0";

/// Per-module versions written into every output header.
inline constexpr std::array<std::pair<const char*, const char*>, 8> module_versions{{
    {"medium", "0.1.0"},
    {"modes", "0.1.0"},
    {"propagator", "0.1.0"},
    {"qops", "0.1.0"},
    {"dynamics", "0.1.0"},
    {"pointgas", "0.1.0"},
    {"regime", "0.1.0"},
    {"cli", "0.1.0"},
}};

} // namespace atomlight
