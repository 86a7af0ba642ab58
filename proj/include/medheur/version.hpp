#pragma once

namespace medheur {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace medheur
