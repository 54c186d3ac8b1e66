#pragma once

namespace sparsear {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sparsear
