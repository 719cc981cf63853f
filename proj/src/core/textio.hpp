#pragma once

#include <charconv>
#include <string>

#include "error.hpp"

namespace fgsmbench {

/// Locale-independent decimal formatting, 6 significant digits ("%g" style).
/// All CSV and chart numbers go through this, so emitted files are
/// byte-stable across machines.
inline std::string fmt_g6(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

/// Fixed six decimal places, e.g. 1 -> "1.000000".
inline std::string fmt_f6(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    return std::string(buf, res.ptr);
}

} // namespace fgsmbench
