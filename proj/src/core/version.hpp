#pragma once

namespace fgsmbench {

inline constexpr const char* kVersion = "0.1.0";

} // namespace fgsmbench
