#include <algorithm>
#include <cmath>
#include <numbers>

#include "gridpv/plant.hpp"

namespace gridpv::plant {

namespace {

// Phase angle with frequency steps integrated so the waveform stays continuous.
// Events are assumed sorted (the scenario loader sorts them).
double grid_angle(double t, const GridSpec& grid)
{
    double theta = 0.0;
    double t_prev = 0.0;
    double f = grid.freq;
    for (const auto& ev : grid.freq_events) {
        if (ev.time >= t) {
            break;
        }
        const double t_ev = std::max(ev.time, 0.0);
        theta += 2.0 * std::numbers::pi * f * (t_ev - t_prev);
        t_prev = t_ev;
        f = ev.freq;
    }
    return theta + 2.0 * std::numbers::pi * f * (t - t_prev);
}

} // namespace

double grid_frequency(double t, const GridSpec& grid)
{
    double f = grid.freq;
    for (const auto& ev : grid.freq_events) {
        if (ev.time >= t) {
            break;
        }
        f = ev.freq;
    }
    return f;
}

ThreePhase grid_voltage(double t, const GridSpec& grid)
{
    const double theta = grid_angle(t, grid);
    const double peak = std::numbers::sqrt2 * grid.u_gnom;
    double scale[3] = {1.0, 1.0, 1.0};
    for (const auto& sag : grid.sags) {
        if (t >= sag.t_start && t < sag.t_end) {
            scale[0] *= sag.per_phase_scale.r;
            scale[1] *= sag.per_phase_scale.s;
            scale[2] *= sag.per_phase_scale.t;
        }
    }
    double u[3];
    for (int k = 0; k < 3; ++k) {
        const double th = theta - k * 2.0 * std::numbers::pi / 3.0;
        double v = std::sin(th);
        for (const auto& h : grid.harmonics) {
            v += h.fraction * std::sin(h.order * th);
        }
        u[k] = peak * scale[k] * v;
    }
    return {u[0], u[1], u[2]};
}

} // namespace gridpv::plant
