#pragma once

#include <string_view>

namespace gnp_vamp {

inline constexpr std::string_view library_name = "gnp_vamp";
inline constexpr std::string_view library_version = "0.1.0";

}  // namespace gnp_vamp
