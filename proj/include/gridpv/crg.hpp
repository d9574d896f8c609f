#pragma once

// Current references generator: instantaneous power algebra in the
// stationary frame and the constant-active-power reference currents for
// balanced and unbalanced grid voltages.

#include "gridpv/frames.hpp"

namespace gridpv::crg {

inline constexpr double kVoltageGuard = 1.0; ///< V^2

/// Average and oscillating active/reactive power terms of a sequence pair.
struct PowerDecomposition {
    double p_avg_pos = 0.0;
    double p_avg_neg = 0.0;
    double p_osc = 0.0;
    double q_avg_pos = 0.0;
    double q_avg_neg = 0.0;
    double q_osc = 0.0;

    double p_total() const { return p_avg_pos + p_avg_neg + p_osc; }
    double q_total() const { return q_avg_pos + q_avg_neg + q_osc; }
};

PowerDecomposition instantaneous_powers(const AlphaBeta& u_pos, const AlphaBeta& u_neg,
                                        const AlphaBeta& i_pos, const AlphaBeta& i_neg);

/// Instantaneous active power u.i of a single (non-separated) pair.
inline double active_power(const AlphaBeta& u, const AlphaBeta& i) { return u.dot(i); }

/// Instantaneous reactive power u_beta i_alpha - u_alpha i_beta; positive for
/// a current lagging the voltage.
inline double reactive_power(const AlphaBeta& u, const AlphaBeta& i)
{
    return u.beta * i.alpha - u.alpha * i.beta;
}

/// Share of the positive sequence, K_P = K_Q = |u+|^2 / (|u+|^2 + |u-|^2).
/// Throws DegenerateVoltage when both magnitudes vanish.
double k_split(const AlphaBeta& u_pos, const AlphaBeta& u_neg);

/// Constant-active-power reference currents (zero oscillating active power).
/// Throws SequenceSingularity when |u+|^2 - |u-|^2 <= kVoltageGuard.
AlphaBeta current_references(double p_ref, double q_ref, const AlphaBeta& u_pos,
                             const AlphaBeta& u_neg);

/// The same references assembled from the K_P-weighted sequence vectors and
/// their quadrature companions, using the equivalent squared amplitudes
/// |u'+|^2 = K_P (|u+|^2 - |u-|^2) and |u'-|^2 = (1 - K_P)(|u+|^2 - |u-|^2).
AlphaBeta current_references_split(double p_ref, double q_ref, const AlphaBeta& u_pos,
                                   const AlphaBeta& u_neg, double k_p);

/// Axis amplitudes of the reference-current trajectory with the positive and
/// negative sequences aligned at t = 0:
///   i_alpha(t) = k_alpha cos(wt + theta_alpha),  i_beta(t) = k_beta sin(wt + theta_beta).
struct ReferenceEnvelope {
    double k_alpha = 0.0;
    double theta_alpha = 0.0;
    double k_beta = 0.0;
    double theta_beta = 0.0;
    double i_p_large = 0.0;
    double i_p_short = 0.0;
    double i_q_large = 0.0;
    double i_q_short = 0.0;
};

ReferenceEnvelope reference_envelope(double p_ref, double q_ref, double u_pos_amp,
                                     double u_neg_amp, double k_p);

} // namespace gridpv::crg
