#pragma once

namespace cocyclelab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cocyclelab
