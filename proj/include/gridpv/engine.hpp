#pragma once

// Two-rate simulation loop: the plant advances every T_s, the controller
// every controller_ratio plant steps with a one-sample computation delay.

#include <cstddef>
#include <string>
#include <vector>

#include "gridpv/frames.hpp"
#include "gridpv/lvrt.hpp"
#include "gridpv/metrics.hpp"
#include "gridpv/scenario.hpp"

namespace gridpv {

/// What the controller saw and decided at one sample.
struct ControllerSample {
    double time = 0.0;
    std::size_t plant_index = 0; ///< plant step at which the measurement was taken
    double p_ref = 0.0;          ///< supervisor P*
    double p_cmd = 0.0;          ///< DC-link regulator output actually fed to the references
    double q_ref = 0.0;
    double s_fault = 0.0;
    double p_limit = 0.0;
    double vdc_ref = 0.0;
    double v_fault = 0.0;
    double omega = 0.0;
    lvrt::Mode mode = lvrt::Mode::NormalMppt;
    bool fault_flag = false;
    AlphaBeta i_ref;
    AlphaBeta m_computed; ///< latched now, applied from the next sample on
    AlphaBeta m_applied;  ///< in force while this sample was taken
    bool saturated = false;
};

struct RunResult {
    std::string scenario;
    Series series;
    std::vector<ControllerSample> trace;
    MetricsReport metrics;
    bool failed = false;
    std::string failure;
    bool disconnected = false;
    double disconnect_time = -1.0;
    std::vector<std::string> notes; ///< non-fatal remarks (e.g. skipped windows)
};

/// Runs a scenario to completion. NumericalBlowup and SequenceSingularity end
/// or degrade the run and are reported through `failed` / `failure`; a
/// disconnection that the scenario does not expect is a failure as well.
RunResult run_scenario(const Scenario& sc);

/// Crossover of Kp K_PWM / (w L) for the current loop, Hz.
double current_loop_crossover_hz(double kp, double v_dc, double l_filter);

} // namespace gridpv
