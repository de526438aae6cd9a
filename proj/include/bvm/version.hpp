#pragma once

namespace bvm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bvm
