#pragma once

namespace spls {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spls
