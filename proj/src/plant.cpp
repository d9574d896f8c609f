#include <cmath>
#include <string>

#include "gridpv/errors.hpp"
#include "gridpv/plant.hpp"

namespace gridpv::plant {

namespace {

struct Deriv {
    double dv;
    double di_a;
    double di_b;
};

Deriv derivative(double t, double v, double ia, double ib, const PlantInputs& in,
                 const GridSpec& grid, const PvArray& pv, const PlantParams& p, bool connected)
{
    const double i_pv = pv.current(v, in.irradiance, in.temp_c);
    if (!connected) {
        return {i_pv / p.c_link, 0.0, 0.0};
    }
    const AlphaBeta u = abc_to_alphabeta(grid_voltage(t, grid));
    const double kp = k_pwm(v);
    const AlphaBeta v_inv{in.m.alpha * kp, in.m.beta * kp};
    const double l = p.l_filter + grid.thevenin_l;
    const double r = p.r_filter + grid.thevenin_r;
    // Lossless bridge: DC power equals the AC power at the inverter terminals.
    const double i_dc = v > 0.0 ? (v_inv.alpha * ia + v_inv.beta * ib) / v : 0.0;
    return {(i_pv - i_dc) / p.c_link, (v_inv.alpha - u.alpha - r * ia) / l,
            (v_inv.beta - u.beta - r * ib) / l};
}

} // namespace

PlantState plant_step(const PlantState& s, const PlantInputs& in, const GridSpec& grid,
                      const PvArray& pv, const PlantParams& params, double dt)
{
    const double t = s.sim_time;
    auto f = [&](double tt, double v, double a, double b) {
        return derivative(tt, v, a, b, in, grid, pv, params, s.connected);
    };
    const Deriv k1 = f(t, s.v_dc, s.i_alpha, s.i_beta);
    const Deriv k2 = f(t + 0.5 * dt, s.v_dc + 0.5 * dt * k1.dv, s.i_alpha + 0.5 * dt * k1.di_a,
                       s.i_beta + 0.5 * dt * k1.di_b);
    const Deriv k3 = f(t + 0.5 * dt, s.v_dc + 0.5 * dt * k2.dv, s.i_alpha + 0.5 * dt * k2.di_a,
                       s.i_beta + 0.5 * dt * k2.di_b);
    const Deriv k4 = f(t + dt, s.v_dc + dt * k3.dv, s.i_alpha + dt * k3.di_a,
                       s.i_beta + dt * k3.di_b);

    PlantState out = s;
    out.v_dc += dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    out.i_alpha += dt / 6.0 * (k1.di_a + 2.0 * k2.di_a + 2.0 * k3.di_a + k4.di_a);
    out.i_beta += dt / 6.0 * (k1.di_b + 2.0 * k2.di_b + 2.0 * k3.di_b + k4.di_b);
    out.sim_time = t + dt;
    if (!s.connected) {
        out.i_alpha = 0.0;
        out.i_beta = 0.0;
    }

    if (!std::isfinite(out.v_dc) || out.v_dc <= 0.0 || out.v_dc > params.v_dc_limit) {
        throw NumericalBlowup("v_dc = " + std::to_string(out.v_dc) + " V at t = " +
                              std::to_string(out.sim_time) + " s");
    }
    const double i_mag = std::hypot(out.i_alpha, out.i_beta);
    if (!std::isfinite(i_mag) || i_mag > params.i_limit) {
        throw NumericalBlowup("|i| = " + std::to_string(i_mag) + " A at t = " +
                              std::to_string(out.sim_time) + " s");
    }
    return out;
}

AlphaBeta pcc_voltage(const PlantState& s, const AlphaBeta& m, const GridSpec& grid,
                      const PlantParams& params)
{
    const AlphaBeta u = abc_to_alphabeta(grid_voltage(s.sim_time, grid));
    if (!s.connected) {
        return u;
    }
    // u_pcc = u_src + Zth i, with di/dt taken from the filter equation.
    const double kp = k_pwm(s.v_dc);
    const double l = params.l_filter + grid.thevenin_l;
    const double r = params.r_filter + grid.thevenin_r;
    const AlphaBeta di{(m.alpha * kp - u.alpha - r * s.i_alpha) / l,
                       (m.beta * kp - u.beta - r * s.i_beta) / l};
    return {u.alpha + grid.thevenin_r * s.i_alpha + grid.thevenin_l * di.alpha,
            u.beta + grid.thevenin_r * s.i_beta + grid.thevenin_l * di.beta};
}

} // namespace gridpv::plant
