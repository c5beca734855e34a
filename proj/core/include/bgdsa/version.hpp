#pragma once

namespace bgdsa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bgdsa
