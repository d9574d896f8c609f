#include "gridpv/crg.hpp"

#include <cmath>

#include "gridpv/errors.hpp"

namespace gridpv::crg {

PowerDecomposition instantaneous_powers(const AlphaBeta& up, const AlphaBeta& un,
                                        const AlphaBeta& ip, const AlphaBeta& in)
{
    PowerDecomposition d;
    d.p_avg_pos = up.alpha * ip.alpha + up.beta * ip.beta;
    d.p_avg_neg = un.alpha * in.alpha + un.beta * in.beta;
    d.p_osc = up.alpha * in.alpha + up.beta * in.beta + un.alpha * ip.alpha + un.beta * ip.beta;
    d.q_avg_pos = up.beta * ip.alpha - up.alpha * ip.beta;
    d.q_avg_neg = un.beta * in.alpha - un.alpha * in.beta;
    d.q_osc = up.beta * in.alpha - up.alpha * in.beta + un.beta * ip.alpha - un.alpha * ip.beta;
    return d;
}

double k_split(const AlphaBeta& u_pos, const AlphaBeta& u_neg)
{
    const double pos = u_pos.norm_sq();
    const double neg = u_neg.norm_sq();
    if (pos + neg < kVoltageGuard) {
        throw DegenerateVoltage("positive and negative sequence voltages both vanished");
    }
    return pos / (pos + neg);
}

namespace {

double sequence_delta(const AlphaBeta& u_pos, const AlphaBeta& u_neg)
{
    const double delta = u_pos.norm_sq() - u_neg.norm_sq();
    if (delta <= kVoltageGuard) {
        throw SequenceSingularity("|u+|^2 - |u-|^2 = " + std::to_string(delta) +
                                  " V^2 is below the guard");
    }
    return delta;
}

} // namespace

AlphaBeta current_references(double p_ref, double q_ref, const AlphaBeta& up,
                             const AlphaBeta& un)
{
    const double delta = sequence_delta(up, un);
    const double p = p_ref / delta;
    const double q = q_ref / delta;
    return {(up.alpha - un.alpha) * p + (up.beta + un.beta) * q,
            (up.beta - un.beta) * p - (up.alpha + un.alpha) * q};
}

AlphaBeta current_references_split(double p_ref, double q_ref, const AlphaBeta& up,
                                   const AlphaBeta& un, double k_p)
{
    const double delta = sequence_delta(up, un);
    const double den_pos = k_p * delta;
    const double den_neg = (1.0 - k_p) * delta;
    // A sequence with zero weight contributes nothing, whatever its denominator.
    const double w_pos = k_p > 0.0 ? k_p / den_pos : 0.0;
    const double w_neg = k_p < 1.0 ? (1.0 - k_p) / den_neg : 0.0;

    const AlphaBeta i_p = p_ref * w_pos * up - p_ref * w_neg * un;
    const AlphaBeta i_q = -(q_ref * w_pos) * quadrature(up) - (q_ref * w_neg) * quadrature(un);
    return i_p + i_q;
}

ReferenceEnvelope reference_envelope(double p_ref, double q_ref, double u_pos_amp,
                                     double u_neg_amp, double k_p)
{
    const double delta = u_pos_amp * u_pos_amp - u_neg_amp * u_neg_amp;
    const double den_pos = k_p * delta;
    const double den_neg = (1.0 - k_p) * delta;
    if (delta <= kVoltageGuard || (k_p > 0.0 && den_pos <= kVoltageGuard * k_p)) {
        throw EnvelopeSingularity("positive-sequence equivalent amplitude is not positive");
    }
    // The negative-sequence term carries weight (1 - K_P) |u-|; it only needs a
    // positive denominator when that weight is nonzero.
    const bool neg_active = k_p < 1.0 && u_neg_amp > 0.0;
    if (neg_active && den_neg <= kVoltageGuard * (1.0 - k_p)) {
        throw EnvelopeSingularity("negative-sequence equivalent amplitude is not positive");
    }

    const double pos_term = k_p > 0.0 ? k_p / den_pos * u_pos_amp : 0.0;
    const double neg_term = neg_active ? (1.0 - k_p) / den_neg * u_neg_amp : 0.0;

    ReferenceEnvelope e;
    e.i_p_large = p_ref * (pos_term + neg_term);
    e.i_p_short = p_ref * (pos_term - neg_term);
    e.i_q_large = q_ref * (pos_term + neg_term);
    e.i_q_short = q_ref * (pos_term - neg_term);
    e.k_alpha = std::hypot(e.i_p_short, e.i_q_short);
    e.k_beta = std::hypot(e.i_p_large, e.i_q_large);
    // i_alpha = I_PShort cos + I_QShort sin and i_beta = I_PLarge sin - I_QLarge cos.
    e.theta_alpha = std::atan2(-e.i_q_short, e.i_p_short);
    e.theta_beta = std::atan2(-e.i_q_large, e.i_p_large);
    return e;
}

} // namespace gridpv::crg
