#pragma once

#include <cstdio>
#include <string>

namespace cohevo {

/// Floating-point text form with 17 significant digits (round-trip exact).
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace cohevo
