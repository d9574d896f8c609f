#pragma once

#include <cmath>
#include <numbers>

#include "gridpv/frames.hpp"

namespace testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTreg = 5.1196e-6 * 8;

// Cosine-referenced three-phase set of peak amplitude a. `sequence` is +1
// for r-s-t order and -1 for r-t-s.
inline gridpv::ThreePhase three_phase(double a, double theta, int sequence = 1)
{
    const double d = sequence * 2.0 * kPi / 3.0;
    return {a * std::cos(theta), a * std::cos(theta - d), a * std::cos(theta + d)};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace testing
