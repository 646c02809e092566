#pragma once

namespace sqtom {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace sqtom
