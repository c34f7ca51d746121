// format.hpp: deterministic number formatting for CSV output

#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace magsq {

// 12 significant digits, "nan" for NaN; locale-independent.
inline std::string fmt_num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

} // namespace magsq
