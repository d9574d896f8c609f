#include "gridpv/output.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace gridpv {

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void kv(std::ostream& os, const std::string& key, const std::string& value)
{
    os << key << " = " << value << '\n';
}

void kv(std::ostream& os, const std::string& key, double value) { kv(os, key, num(value)); }

} // namespace

void write_timeseries(std::ostream& os, const Series& s, int decimation)
{
    if (decimation < 1) {
        throw std::invalid_argument("decimation must be >= 1");
    }
    os << kTimeseriesHeader << '\n';
    char row[512];
    for (std::size_t k = 0; k < s.size(); k += static_cast<std::size_t>(decimation)) {
        const int len = std::snprintf(
            row, sizeof row, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,",
            s.time[k], s.u_r[k], s.u_s[k], s.u_t[k], s.i_r[k], s.i_s[k], s.i_t[k], s.v_dc[k],
            s.i_p[k], s.p[k], s.q[k], s.v_fault[k], s.omega[k]);
        os.write(row, len);
        os << lvrt::mode_name(s.mode[k]) << '\n';
    }
}

void write_metrics(std::ostream& os, const RunResult& r)
{
    const auto& m = r.metrics;
    kv(os, "scenario", r.scenario);
    kv(os, "status", r.failed ? "failed" : "ok");
    if (r.failed) {
        kv(os, "failure", r.failure);
    }
    kv(os, "disconnected", r.disconnected ? "true" : "false");
    if (r.disconnected) {
        kv(os, "disconnect_time", r.disconnect_time);
    }
    kv(os, "samples", num(static_cast<double>(r.series.size())));
    kv(os, "simulated_time", r.series.size() ? r.series.time.back() : 0.0);
    kv(os, "max_phase_current_peak", m.max_phase_current_peak);
    kv(os, "v_fault_min", m.v_fault_min);
    kv(os, "v_fault_max", m.v_fault_max);
    kv(os, "omega_final", m.omega_final);
    kv(os, "omega_settle_time", m.omega_settle_time);
    kv(os, "mode_changes", num(static_cast<double>(m.mode_timeline.size())));
    for (std::size_t k = 0; k < m.mode_timeline.size(); ++k) {
        kv(os, "mode." + std::to_string(k),
           num(m.mode_timeline[k].time) + " " + std::string(lvrt::mode_name(m.mode_timeline[k].mode)));
    }
    for (const auto& w : m.windows) {
        const std::string p = "window." + w.name + ".";
        kv(os, p + "t_start", w.t_start);
        kv(os, p + "t_end", w.t_end);
        kv(os, p + "cycles", num(w.cycles));
        kv(os, p + "freq", w.freq);
        kv(os, p + "omega_mean", w.omega_mean);
        kv(os, p + "p_mean", w.p_mean);
        kv(os, p + "p_ripple_2w", w.p_ripple_2w);
        kv(os, p + "p_ripple_6w", w.p_ripple_6w);
        kv(os, p + "q_mean", w.q_mean);
        kv(os, p + "q_ripple_2w", w.q_ripple_2w);
        kv(os, p + "q_ripple_6w", w.q_ripple_6w);
        const char* ph[3] = {"r", "s", "t"};
        for (int k = 0; k < 3; ++k) {
            kv(os, p + "thd_" + ph[k], w.thd[k]);
        }
        for (int k = 0; k < 3; ++k) {
            kv(os, p + "current_peak_" + ph[k], w.current_peak[k]);
        }
        for (int k = 0; k < 3; ++k) {
            kv(os, p + "current_lag_deg_" + ph[k], w.current_lag_deg[k]);
        }
        kv(os, p + "v_fault_min", w.v_fault_min);
        kv(os, p + "v_fault_max", w.v_fault_max);
        kv(os, p + "v_fault_mean", w.v_fault_mean);
        kv(os, p + "vdc_mean", w.vdc_mean);
        kv(os, p + "vdc_ripple_2w", w.vdc_ripple_2w);
        kv(os, p + "i_p_mean", w.i_p_mean);
        kv(os, p + "mode", std::string(lvrt::mode_name(w.dominant_mode)));
    }
    for (std::size_t k = 0; k < r.notes.size(); ++k) {
        kv(os, "note." + std::to_string(k), r.notes[k]);
    }
}

void write_timeseries_file(const std::string& path, const Series& s, int decimation)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    write_timeseries(os, s, decimation);
}

void write_metrics_file(const std::string& path, const RunResult& r)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    write_metrics(os, r);
}

} // namespace gridpv
