#pragma once

namespace onlinefwer {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace onlinefwer
