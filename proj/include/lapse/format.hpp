#ifndef LAPSE_FORMAT_HPP
#define LAPSE_FORMAT_HPP

#include <cmath>
#include <cstdio>
#include <string>

namespace lapse {

/// printf-style %.<digits>g; 17 digits round-trips any double.
inline std::string format_real(double value, int digits = 17)
{
    if (std::isnan(value)) { return "NaN"; }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
    return buffer;
}

inline std::string format_fixed(double value, int decimals)
{
    if (std::isnan(value)) { return "NaN"; }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
    return buffer;
}

} // namespace lapse

#endif
