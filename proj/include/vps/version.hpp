#pragma once

namespace vps {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vps
