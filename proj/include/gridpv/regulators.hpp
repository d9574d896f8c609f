#pragma once

#include <complex>
#include <span>
#include <vector>

#include "gridpv/frames.hpp"

namespace gridpv::regulators {

/// One resonant cell 2 ki wc s / (s^2 + 2 wc s + (h w)^2), discretized with the
/// bilinear transform pre-warped at its own resonance h w.
struct ResonantCellState {
    double x1 = 0.0;
    double x2 = 0.0;
    int harmonic_index = 1;
    double ki = 0.1;
    double wc = 1.0;

    // Cached discrete coefficients and the omega they were computed for.
    double b0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double omega_cached = -1.0;
    double dt_cached = -1.0;
};

ResonantCellState make_cell(int harmonic_index, double ki, double wc);

inline constexpr double kRetuneThreshold = 0.01; ///< rad/s

/// Advances one cell and returns its output. Coefficients are refreshed when
/// omega moved by more than kRetuneThreshold since the last tuning.
double resonant_cell_step(ResonantCellState& cell, double error, double omega, double dt);

/// Discrete frequency response of a cell tuned for `omega_tune`, evaluated at
/// `omega_eval`.
std::complex<double> cell_response(const ResonantCellState& cell, double omega_eval,
                                   double omega_tune, double dt);

/// Proportional term plus every resonant cell.
double pr_hc_step(std::span<ResonantCellState> cells, double kp, double error, double omega,
                  double dt);

struct PrHcConfig {
    double kp = 0.0011;
    double ki = 0.1;
    double wc = 1.0;
    std::vector<int> hc_harmonics{5, 7, 11, 13};
    double ki_hc = 0.1;
    bool hc_enabled = true;
};

/// One axis of the inner current loop. Supports a conditional hold: the last
/// step can be rolled back while the modulator is saturated.
class PrHcRegulator {
public:
    explicit PrHcRegulator(const PrHcConfig& cfg);

    double step(double error, double omega, double dt);
    void hold_last();

    /// Complex gain of the whole regulator at omega (cells tuned at omega).
    std::complex<double> response(double omega, double dt) const;

    /// Loads every cell with the periodic steady state for the error
    /// sequence e[n] = Re(error_phasor exp(j omega n dt)), n = 0 being the
    /// next call to step(). Used to start a run already in regulation.
    void preset(std::complex<double> error_phasor, double omega, double dt);

    std::span<const ResonantCellState> cells() const { return cells_; }

private:
    double kp_;
    std::vector<ResonantCellState> cells_;
    std::vector<ResonantCellState> previous_;
};

struct PiState {
    double integral = 0.0;
    double kp = 3977.5;
    double ki = 152110.0;
    double out_min = 0.0;
    double out_max = 506.91e3;
};

struct PiResult {
    double output;
    PiState state;
};

/// DC-link voltage PI. The error is (vdc - vdc_ref): excess DC voltage raises
/// the delivered power. Output is clamped to [out_min, out_max] with
/// back-calculation (tracking time kp/ki) on the integrator.
PiResult pi_vdc_step(PiState state, double vdc_ref, double vdc, double dt);

struct ModulationResult {
    AlphaBeta m;
    bool saturated;
};

/// Radially scales m into the disc of radius m_max.
ModulationResult modulation_limit(const AlphaBeta& m, double m_max);

} // namespace gridpv::regulators
