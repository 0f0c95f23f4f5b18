#pragma once

namespace nvpol {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nvpol
