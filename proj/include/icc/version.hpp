#pragma once

namespace icc {

inline constexpr const char* kVersion = "0.1.0";

} // namespace icc
