#pragma once

#include <numbers>

// Exact SI (2019) values.
namespace dce::constants {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPlanck = 6.62607015e-34;           // J s
inline constexpr double kBoltzmann = 1.380649e-23;          // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);  // Wb

}  // namespace dce::constants
