#ifndef SITSQ_CONSTANTS_HPP
#define SITSQ_CONSTANTS_HPP

// CODATA 2018 values. Single source of truth for all physics code and tests.
namespace sitsq::constants {

inline constexpr double k_boltzmann = 1.380649e-23;      // J/K (exact)
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double c_light = 2.99792458e8;          // m/s (exact)
inline constexpr double atomic_mass_unit = 1.66053906892e-27; // kg
inline constexpr double pi = 3.14159265358979323846;

} // namespace sitsq::constants

#endif
