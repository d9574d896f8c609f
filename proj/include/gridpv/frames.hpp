#pragma once

#include <cmath>

namespace gridpv {

/// Instantaneous r/s/t phase quantities (volts or amps).
struct ThreePhase {
    double r = 0.0;
    double s = 0.0;
    double t = 0.0;

    bool finite() const { return std::isfinite(r) && std::isfinite(s) && std::isfinite(t); }
    double dot(const ThreePhase& o) const { return r * o.r + s * o.s + t * o.t; }
};

/// Stationary-frame pair in the power-invariant convention.
struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;

    double magnitude() const { return std::hypot(alpha, beta); }
    double norm_sq() const { return alpha * alpha + beta * beta; }
    double dot(const AlphaBeta& o) const { return alpha * o.alpha + beta * o.beta; }
    bool finite() const { return std::isfinite(alpha) && std::isfinite(beta); }

    AlphaBeta& operator+=(const AlphaBeta& o)
    {
        alpha += o.alpha;
        beta += o.beta;
        return *this;
    }
    AlphaBeta& operator-=(const AlphaBeta& o)
    {
        alpha -= o.alpha;
        beta -= o.beta;
        return *this;
    }
};

inline AlphaBeta operator+(AlphaBeta a, const AlphaBeta& b) { return a += b; }
inline AlphaBeta operator-(AlphaBeta a, const AlphaBeta& b) { return a -= b; }
inline AlphaBeta operator-(const AlphaBeta& a) { return {-a.alpha, -a.beta}; }
inline AlphaBeta operator*(double k, const AlphaBeta& a) { return {k * a.alpha, k * a.beta}; }
inline AlphaBeta operator*(const AlphaBeta& a, double k) { return k * a; }

/// Power-invariant Clarke transform; the zero-sequence component is dropped.
AlphaBeta abc_to_alphabeta(const ThreePhase& x);

/// Inverse of abc_to_alphabeta on the zero-sequence-free subspace.
ThreePhase alphabeta_to_abc(const AlphaBeta& x);

/// Rotates by +90 degrees: (alpha, beta) -> (-beta, alpha).
inline AlphaBeta quadrature(const AlphaBeta& x) { return {-x.beta, x.alpha}; }

} // namespace gridpv
