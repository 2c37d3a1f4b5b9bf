#pragma once

#include <numbers>

namespace leafsym {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kEPi = 23.140692632779267;  // e^pi, the homothety of the end

}  // namespace leafsym
