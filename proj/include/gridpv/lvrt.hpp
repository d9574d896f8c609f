#pragma once

// Ride-through supervisor: sag bookkeeping, the reactive-power law, the
// active-power capability under the current limit, the disconnection
// profile and the MPPT / non-MPPT operating modes.

#include <string_view>
#include <utility>
#include <vector>

#include "gridpv/frames.hpp"
#include "gridpv/sync.hpp"

namespace gridpv::lvrt {

enum class Mode { NormalMppt, FaultNonMppt, FaultMppt, Disconnected };

std::string_view mode_name(Mode m);

struct SetPoints {
    double p_ref = 0.0;   ///< W, supervisor's active-power command
    double q_ref = 0.0;   ///< var
    double vdc_ref = 0.0; ///< V
    Mode mode = Mode::NormalMppt;
    bool fault_signal = false;
    double s_fault = 0.0; ///< VA, apparent-power capability this sample
    double p_limit = 0.0; ///< W, ceiling for the DC-link regulator output
};

/// Minimum retained voltage as a function of time since the fault started.
/// Linear between breakpoints, the last value holds afterwards.
class RideThroughProfile {
public:
    RideThroughProfile(); ///< (0 s, 0) -> (0.5 s, 0) -> (1 s, 0.85)
    explicit RideThroughProfile(std::vector<std::pair<double, double>> breakpoints);

    double min_voltage(double t_since_fault) const;
    const std::vector<std::pair<double, double>>& breakpoints() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

/// (|u+| - |u-|) / (sqrt(3) u_nom) * S_nom, never negative.
double s_fault(const AlphaBeta& u_pos, const AlphaBeta& u_neg, double s_nom, double u_gnom_rms);

/// Piecewise reactive-power requirement against the sag depth.
double q_requirement(double v_fault, double s_nom);

struct PowerSplit {
    double p_fault;
    double q_final;
};

/// Active power left under the apparent-power limit; Q is clipped to S_fault.
PowerSplit p_fault(double s_fault, double q_req);

struct MpptState {
    double vdc_ref = 807.4;
    double prev_power = 0.0;
    double step = 2.0;
    int direction = 1;
    double v_min = 500.0;
    double v_oc = 1003.2;
    double track_window = 4.0; ///< V; perturb only when v_dc is this close (0 = off)
};

/// Perturb and observe. The reference is held while v_dc sits more than
/// track_window away from it, so it cannot run away while the DC-link loop
/// lags or saturates.
MpptState mppt_step(MpptState state, double v_dc, double p_now);

struct NonMpptConfig {
    double gain = 0.05;   ///< V/s of reference motion per W of power excess
    double slew = 50e3;   ///< V/s
    double period = 1e-3; ///< s between calls
};

/// Moves the DC reference along the right branch of the P-V curve until the
/// PV power matches the target. `v_floor` (the MPP voltage estimate) is never
/// crossed and the reference never runs more than one slew step above v_dc.
MpptState non_mppt_step(MpptState state, double p_target, double p_now, double v_dc,
                        double v_floor, const NonMpptConfig& cfg = {});

struct SupervisorConfig {
    double s_nom = 506.91e3; ///< VA, the array's STC output
    double u_gnom_rms = 230.0;
    RideThroughProfile profile{};
};

struct SupervisorState {
    Mode mode = Mode::NormalMppt;
    bool disconnected = false;
};

/// Mode selection and power set points for one controller sample.
/// `vdc_tracking` / `vdc_derating` are the references held by the MPPT and
/// non-MPPT searches; the supervisor picks the one that matches the mode.
SetPoints supervisor_step(const sync::SyncEstimate& sync, double p_available_mpp,
                          double t_since_fault, SupervisorState& state,
                          const SupervisorConfig& cfg, double vdc_tracking = 0.0,
                          double vdc_derating = 0.0);

struct SupervisorTuning {
    double mppt_step = 2.0;
    double mppt_period = 1e-3;
    double v_min = 500.0;
    double track_window = 4.0;
    NonMpptConfig non_mppt{};
    double power_filter_tau = 20e-3; ///< s, smoothing of the PV power estimate
};

/// Stateful wrapper used by the engine. Owns the P&O tracker, the non-MPPT
/// search, the fault clock and the MPP power estimate.
class Supervisor {
public:
    Supervisor(SupervisorConfig cfg, SupervisorTuning tuning, double v_mpp_init, double v_oc);

    /// Called every controller sample with the measured DC voltage and PV power.
    SetPoints step(const sync::SyncEstimate& sync, double t, double dt, double v_dc, double p_pv);

    void force_disconnect();
    void reset();

    const SupervisorState& state() const { return state_; }
    const MpptState& tracker() const { return tracker_; }
    const MpptState& derating() const { return derating_; }
    double available_power() const { return p_available_; }

private:
    SupervisorConfig cfg_;
    SupervisorTuning tuning_;
    SupervisorState state_;
    MpptState tracker_;
    MpptState derating_;
    double v_mpp_at_fault_ = 0.0;
    double fault_start_ = 0.0;
    bool in_fault_ = false;
    double next_search_ = 0.0;
    double p_filtered_ = 0.0;
    double p_available_ = 0.0;
    bool power_seeded_ = false;
};

} // namespace gridpv::lvrt
