#pragma once

namespace swm {

inline constexpr const char* kVersion = "0.1.0";

} // namespace swm
