#pragma once

#include <cmath>

namespace arrayloc {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace arrayloc
