#pragma once

// Multiple-SOGI frequency-locked loop: a bank of adaptive resonant filters,
// one dual (alpha/beta) pair per harmonic, cross-coupled by a harmonic
// decoupling network, with per-harmonic sequence separation, a normalized
// FLL on the fundamental channel and the sag detector.

#include <cmath>
#include <numbers>
#include <vector>

#include "gridpv/frames.hpp"

namespace gridpv::sync {

/// Single second-order generalized integrator with quadrature output.
struct SogiState {
    double v_band = 0.0;     ///< band-pass output u'
    double v_quad = 0.0;     ///< quadrature output qu' (lags u' by 90 degrees)
    double prev_input = 0.0; ///< last input sample, needed by the trapezoidal rule
    int harmonic_index = 1;
    double gain = std::numbers::sqrt2;
};

/// Trapezoidal step of du'/dt = w(k(u - u') - qu'), dqu'/dt = w u'.
SogiState sogi_step(SogiState state, double input, double omega_res, double dt);

/// The band-pass output of the next step is an affine function of the next
/// input, v_band' = slope * input + offset. The decoupling network needs this
/// to solve the channel cross-feed exactly within one sample.
struct SogiAffine {
    double slope;
    double offset;
};
SogiAffine sogi_affine(const SogiState& state, double omega_res, double dt);

struct FllConfig {
    double gamma = 50.0;
    double gain = std::numbers::sqrt2; ///< normalization gain K
    double omega_min = 2.0 * std::numbers::pi * 40.0;
    double omega_max = 2.0 * std::numbers::pi * 70.0;
    double amplitude_floor = 1.0; ///< V^2
};

struct FllState {
    double omega_est = 2.0 * std::numbers::pi * 50.0;
    double gamma = 50.0;
};

/// One forward-Euler step of the normalized FLL. `error_quad` is the sum over
/// both axes of (input - v_band) * v_quad of the fundamental channel.
FllState fll_step(FllState state, double error_quad, double amplitude_sq, double dt,
                  const FllConfig& cfg = {});

struct SequencePair {
    AlphaBeta pos;
    AlphaBeta neg;
};

/// Positive/negative sequence calculator fed by the in-phase and the 90-degree
/// lagging outputs of a dual SOGI.
SequencePair pnsc(const AlphaBeta& filtered, const AlphaBeta& quad);

struct FaultReading {
    double v_fault;
    bool raw_flag;
};

inline constexpr double kFaultThreshold = 0.85;

/// Normalized positive-sequence magnitude |u+| / (sqrt(3) u_nom).
FaultReading detect_fault(const AlphaBeta& pos_fundamental, double u_gnom_rms);

struct HarmonicSequence {
    int order;
    SequencePair seq;
};

struct SyncEstimate {
    double omega_est = 0.0;
    std::vector<HarmonicSequence> per_harmonic;
    double v_fault = 0.0;
    bool fault_flag = false;

    /// Sequence pair of harmonic `order`; the fundamental always exists.
    const SequencePair& harmonic(int order) const;
    const SequencePair& fundamental() const { return harmonic(1); }
};

struct MsogiConfig {
    std::vector<int> harmonics{1, 5, 7, 11, 13};
    double sogi_gain = std::numbers::sqrt2; ///< K; channel i uses K / i
    FllConfig fll{};
    double omega_init = 2.0 * std::numbers::pi * 50.0;
    double u_gnom_rms = 230.0;
    int debounce_samples = 2;
};

class Msogi {
public:
    explicit Msogi(MsogiConfig cfg);

    /// Advances the whole synchronization chain by one controller sample.
    const SyncEstimate& step(const ThreePhase& u_abc, double dt);

    /// Loads every channel with a steady positive-sequence fundamental so the
    /// estimator starts locked instead of from zero.
    void preset(const AlphaBeta& u_fundamental, double omega);

    const SyncEstimate& estimate() const { return est_; }
    const MsogiConfig& config() const { return cfg_; }

private:
    struct Channel {
        int order;
        SogiState alpha;
        SogiState beta;
    };

    MsogiConfig cfg_;
    std::vector<Channel> channels_;
    FllState fll_;
    SyncEstimate est_;
    int debounce_count_ = 0;
};

} // namespace gridpv::sync
