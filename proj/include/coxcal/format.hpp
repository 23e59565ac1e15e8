#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace coxcal {

// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// CSV field for possibly-undefined statistics: NaN becomes an empty field.
inline std::string fmt_csv_opt(double x) { return std::isnan(x) ? std::string{} : fmt_g17(x); }

inline std::string fmt_fixed(double x, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
    return buf;
}

}  // namespace coxcal
