#include "gridpv/regulators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridpv::regulators {

ResonantCellState make_cell(int harmonic_index, double ki, double wc)
{
    if (harmonic_index < 1 || !(ki > 0.0) || !(wc > 0.0)) {
        throw std::invalid_argument("resonant cell needs harmonic >= 1, ki > 0, wc > 0");
    }
    ResonantCellState c;
    c.harmonic_index = harmonic_index;
    c.ki = ki;
    c.wc = wc;
    return c;
}

namespace {

void tune(ResonantCellState& c, double omega, double dt)
{
    const double wr = c.harmonic_index * omega;
    const double k = wr / std::tan(0.5 * wr * dt); // s -> k (z - 1) / (z + 1)
    const double b = 2.0 * c.ki * c.wc;
    const double a_s = 2.0 * c.wc;
    const double d0 = k * k + a_s * k + wr * wr;
    c.b0 = b * k / d0; // b2 = -b0, b1 = 0
    c.a1 = (2.0 * wr * wr - 2.0 * k * k) / d0;
    c.a2 = (k * k - a_s * k + wr * wr) / d0;
    c.omega_cached = omega;
    c.dt_cached = dt;
}

} // namespace

double resonant_cell_step(ResonantCellState& c, double error, double omega, double dt)
{
    if (std::abs(omega - c.omega_cached) > kRetuneThreshold || dt != c.dt_cached) {
        tune(c, omega, dt);
    }
    // Transposed direct form II.
    const double y = c.b0 * error + c.x1;
    c.x1 = -c.a1 * y + c.x2;
    c.x2 = -c.b0 * error - c.a2 * y;
    return y;
}

std::complex<double> cell_response(const ResonantCellState& cell, double omega_eval,
                                   double omega_tune, double dt)
{
    ResonantCellState c = cell;
    tune(c, omega_tune, dt);
    const std::complex<double> zi = std::polar(1.0, -omega_eval * dt); // z^-1
    return c.b0 * (1.0 - zi * zi) / (1.0 + c.a1 * zi + c.a2 * zi * zi);
}

double pr_hc_step(std::span<ResonantCellState> cells, double kp, double error, double omega,
                  double dt)
{
    double out = kp * error;
    for (auto& c : cells) {
        out += resonant_cell_step(c, error, omega, dt);
    }
    return out;
}

PrHcRegulator::PrHcRegulator(const PrHcConfig& cfg) : kp_(cfg.kp)
{
    cells_.push_back(make_cell(1, cfg.ki, cfg.wc));
    if (cfg.hc_enabled) {
        for (int h : cfg.hc_harmonics) {
            cells_.push_back(make_cell(h, cfg.ki_hc, cfg.wc));
        }
    }
    previous_ = cells_;
}

double PrHcRegulator::step(double error, double omega, double dt)
{
    previous_ = cells_;
    return pr_hc_step(cells_, kp_, error, omega, dt);
}

void PrHcRegulator::hold_last() { cells_ = previous_; }

std::complex<double> PrHcRegulator::response(double omega, double dt) const
{
    std::complex<double> g = kp_;
    for (const auto& c : cells_) {
        g += cell_response(c, omega, omega, dt);
    }
    return g;
}

void PrHcRegulator::preset(std::complex<double> error_phasor, double omega, double dt)
{
    const std::complex<double> back = std::polar(1.0, -omega * dt);
    for (auto& c : cells_) {
        tune(c, omega, dt);
        const std::complex<double> y = cell_response(c, omega, omega, dt) * error_phasor;
        // Transposed form II states just before sample 0.
        c.x1 = y.real() - c.b0 * error_phasor.real();
        c.x2 = -c.b0 * (error_phasor * back).real() - c.a2 * (y * back).real();
    }
    previous_ = cells_;
}

PiResult pi_vdc_step(PiState s, double vdc_ref, double vdc, double dt)
{
    const double error = vdc - vdc_ref;
    s.integral += s.ki * error * dt;
    const double raw = s.kp * error + s.integral;
    const double out = std::clamp(raw, s.out_min, s.out_max);
    if (out != raw && s.kp > 0.0) {
        const double tracking = s.ki / s.kp;
        s.integral += (out - raw) * std::min(1.0, tracking * dt);
    }
    return {out, s};
}

ModulationResult modulation_limit(const AlphaBeta& m, double m_max)
{
    const double mag = m.magnitude();
    if (mag <= m_max) {
        return {m, false};
    }
    return {(m_max / mag) * m, true};
}

} // namespace gridpv::regulators
