#pragma once

namespace nhent {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nhent
