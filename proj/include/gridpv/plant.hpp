#pragma once

// Averaged power stage: PV array, DC-link capacitor, averaged VSI, series RL
// filter and a Thevenin grid with scripted disturbances.

#include <vector>

#include "gridpv/frames.hpp"

namespace gridpv::plant {

/// Datasheet-level description of the array at STC.
struct PvArrayModel {
    double v_oc = 1003.2;
    double i_sc = 653.04;
    double v_mpp = 807.4;
    double i_mpp = 627.84;
    int series_modules = 22;
    int strings = 72;
    double r_shunt = 300.0;       ///< Ohm, array level; fixed before fitting
    double alpha_isc = 0.00055;   ///< 1/K, relative short-circuit current coefficient
    double beta_voc = -0.0033;    ///< 1/K, relative open-circuit voltage coefficient
};

/// Single-diode equivalent fitted to the four STC anchors
/// (Isc, Voc, the MPP current and the zero power slope at the MPP).
class PvArray {
public:
    explicit PvArray(const PvArrayModel& model);

    /// Terminal current at voltage v; never negative.
    double current(double v, double irradiance, double temp_c) const;
    double power(double v, double irradiance, double temp_c) const
    {
        return v * current(v, irradiance, temp_c);
    }

    const PvArrayModel& model() const { return model_; }
    double photo_current() const { return i_ph_; }
    double saturation_current() const { return i_0_; }
    double thermal_voltage() const { return a_; } ///< n Ns Vt for the whole array
    double series_resistance() const { return r_s_; }

private:
    PvArrayModel model_;
    double i_ph_ = 0.0;
    double i_0_ = 0.0;
    double a_ = 0.0;
    double r_s_ = 0.0;
};

/// Free-function form of PvArray::current.
double pv_current(double v, double irradiance, double temp_c, const PvArray& array);

struct SagEvent {
    double t_start = 0.0;
    double t_end = 0.0;
    ThreePhase per_phase_scale{1.0, 1.0, 1.0};
};

struct HarmonicComponent {
    int order = 5;
    double fraction = 0.0;
};

/// Frequency step applied at `time` (phase stays continuous).
struct FreqEvent {
    double time = 0.0;
    double freq = 50.0;
};

struct GridSpec {
    double u_gnom = 230.0; ///< V rms, phase-to-neutral
    double freq = 50.0;
    double thevenin_r = 1e-3;
    double thevenin_l = 1e-6;
    std::vector<SagEvent> sags;
    std::vector<HarmonicComponent> harmonics;
    std::vector<FreqEvent> freq_events;
};

/// Grid frequency in Hz at time t.
double grid_frequency(double t, const GridSpec& grid);

/// Source voltage behind the Thevenin impedance. Sine-referenced; harmonic h of
/// phase k is sin(h (theta - k 120 deg)), so the 5th and 11th come out negative
/// sequence and the 7th and 13th positive.
ThreePhase grid_voltage(double t, const GridSpec& grid);

struct PlantParams {
    double c_link = 65000e-6;
    double l_filter = 0.15e-3;
    double r_filter = 5e-3;
    double v_dc_limit = 2000.0;
    double i_limit = 10e3;
};

struct PlantState {
    double v_dc = 807.4;
    double i_alpha = 0.0;
    double i_beta = 0.0;
    double sim_time = 0.0;
    bool connected = true;

    AlphaBeta current() const { return {i_alpha, i_beta}; }
};

/// Inverter gain of the averaged model: v_inv = m * (2/3) v_dc.
inline double k_pwm(double v_dc) { return 2.0 / 3.0 * v_dc; }

struct PlantInputs {
    AlphaBeta m;
    double irradiance = 1000.0;
    double temp_c = 25.0;
};

/// One RK4 step of
///   (L + Lth) di/dt = m K_PWM - u_src - (R + Rth) i
///   C dv/dt         = i_pv(v) - (m K_PWM . i) / v.
/// Throws NumericalBlowup when v_dc or |i| leaves its sanity bound.
PlantState plant_step(const PlantState& state, const PlantInputs& in, const GridSpec& grid,
                      const PvArray& pv, const PlantParams& params, double dt);

/// Voltage at the point of common coupling for the given state and modulation.
AlphaBeta pcc_voltage(const PlantState& state, const AlphaBeta& m, const GridSpec& grid,
                      const PlantParams& params);

} // namespace gridpv::plant
