#pragma once

#include <string_view>

namespace granular {

inline constexpr std::string_view kToolName = "granular";
inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace granular
