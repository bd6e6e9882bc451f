#pragma once

namespace tnsim {

inline constexpr const char* version_string = "tnsim 0.1.0";

}  // namespace tnsim
