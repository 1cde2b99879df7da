#pragma once

namespace sls {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sls
