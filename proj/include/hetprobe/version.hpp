#pragma once

namespace hetprobe {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hetprobe
