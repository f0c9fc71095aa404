#pragma once

namespace magspring::constants {

inline constexpr double pi = 3.14159265358979323846;
// vacuum permeability [H/m]
inline constexpr double mu0 = 1.25663706143591729539e-6;
// standard gravity [m/s^2]
inline constexpr double g0 = 9.81;

inline constexpr double deg2rad = pi / 180.0;
inline constexpr double rad2deg = 180.0 / pi;

}  // namespace magspring::constants
