#include "gridpv/frames.hpp"

namespace gridpv {

namespace {
const double kScale = std::sqrt(2.0 / 3.0);
const double kHalfSqrt3 = std::sqrt(3.0) / 2.0;
} // namespace

AlphaBeta abc_to_alphabeta(const ThreePhase& x)
{
    return {kScale * (x.r - 0.5 * x.s - 0.5 * x.t), kScale * kHalfSqrt3 * (x.s - x.t)};
}

ThreePhase alphabeta_to_abc(const AlphaBeta& x)
{
    // The Clarke matrix has orthonormal rows, so its transpose is the pseudo-inverse.
    return {kScale * x.alpha,
            kScale * (-0.5 * x.alpha + kHalfSqrt3 * x.beta),
            kScale * (-0.5 * x.alpha - kHalfSqrt3 * x.beta)};
}

} // namespace gridpv
