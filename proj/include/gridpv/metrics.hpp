#pragma once

// Post-processing of simulated time series: single-bin DFT quantities over
// whole fundamental periods, per-window summaries and run-level figures.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridpv/lvrt.hpp"
#include "gridpv/scenario.hpp"

namespace gridpv {

/// Plant-rate record. Controller-side columns (v_fault, omega, mode) hold the
/// value of the latest controller sample.
struct Series {
    std::vector<double> time;
    std::vector<double> u_r, u_s, u_t; ///< PCC phase voltages
    std::vector<double> i_r, i_s, i_t;
    std::vector<double> v_dc, i_p, p, q;
    std::vector<double> v_fault, omega;
    std::vector<lvrt::Mode> mode;

    std::size_t size() const { return time.size(); }
    void reserve(std::size_t n);
};

/// Complex amplitude of x at frequency f (Hz) over uniformly spaced samples
/// starting at time 0: (2/N) sum x[n] exp(-j 2 pi f n dt). For a cosine of
/// amplitude A and phase phi this returns A exp(j phi).
std::complex<double> dft_bin(std::span<const double> x, double dt, double f);

/// THD from harmonic bins 2..max_order relative to the fundamental at f1.
double thd(std::span<const double> x, double dt, double f1, int max_order = 25);

struct WindowMetrics {
    std::string name;
    double t_start = 0.0;
    double t_end = 0.0; ///< end of the analysed span (whole periods)
    int cycles = 0;
    double freq = 0.0; ///< Hz, from the mean estimated omega

    double p_mean = 0.0, p_ripple_2w = 0.0, p_ripple_6w = 0.0;
    double q_mean = 0.0, q_ripple_2w = 0.0, q_ripple_6w = 0.0;
    double thd[3] = {0.0, 0.0, 0.0};
    double current_peak[3] = {0.0, 0.0, 0.0};
    double current_fund[3] = {0.0, 0.0, 0.0}; ///< fundamental amplitude per phase
    double current_lag_deg[3] = {0.0, 0.0, 0.0}; ///< voltage angle minus current angle
    double v_fault_min = 0.0, v_fault_max = 0.0, v_fault_mean = 0.0;
    double omega_mean = 0.0;
    double vdc_mean = 0.0, vdc_ripple_2w = 0.0;
    double i_p_mean = 0.0;
    lvrt::Mode dominant_mode = lvrt::Mode::NormalMppt;

    double max_current_peak() const;
};

struct ModeChange {
    double time;
    lvrt::Mode mode;
};

struct MetricsReport {
    std::vector<WindowMetrics> windows;
    double max_phase_current_peak = 0.0;
    double v_fault_min = 0.0;
    double v_fault_max = 0.0;
    double omega_settle_time = 0.0; ///< s; last exit from the +-0.5 % band
    double omega_final = 0.0;
    std::vector<ModeChange> mode_timeline;

    const WindowMetrics* window(const std::string& name) const;
};

/// Throws WindowTooShort when the window spans fewer than 5 periods.
WindowMetrics window_metrics(const Series& s, const Window& w);

/// `omega_ref` is the band centre for the settle time (the true final grid
/// angular frequency).
MetricsReport compute_metrics(const Series& s, const std::vector<Window>& windows,
                              double omega_ref);

} // namespace gridpv
