#include "gridpv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "gridpv/errors.hpp"

namespace gridpv {

void Series::reserve(std::size_t n)
{
    for (auto* v : {&time, &u_r, &u_s, &u_t, &i_r, &i_s, &i_t, &v_dc, &i_p, &p, &q, &v_fault,
                    &omega}) {
        v->reserve(n);
    }
    mode.reserve(n);
}

std::complex<double> dft_bin(std::span<const double> x, double dt, double f)
{
    if (x.empty()) {
        return {};
    }
    // Rotating phasor; re-anchored every 4096 samples to avoid drift.
    const double w = -2.0 * std::numbers::pi * f * dt;
    const std::complex<double> step = std::polar(1.0, w);
    std::complex<double> acc{};
    std::complex<double> rot{1.0, 0.0};
    for (std::size_t n = 0; n < x.size(); ++n) {
        if ((n & 4095) == 0) {
            rot = std::polar(1.0, w * static_cast<double>(n));
        }
        acc += x[n] * rot;
        rot *= step;
    }
    return 2.0 / static_cast<double>(x.size()) * acc;
}

double thd(std::span<const double> x, double dt, double f1, int max_order)
{
    const double fund = std::abs(dft_bin(x, dt, f1));
    if (fund == 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (int h = 2; h <= max_order; ++h) {
        sum += std::norm(dft_bin(x, dt, h * f1));
    }
    return std::sqrt(sum) / fund;
}

double WindowMetrics::max_current_peak() const
{
    return std::max({current_peak[0], current_peak[1], current_peak[2]});
}

namespace {

double mean(std::span<const double> x)
{
    return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

// Amplitude at f of the mean-removed signal; keeps the DC term from leaking
// into ripple bins when a period is not a whole number of samples.
double ripple(std::span<const double> x, double dt, double f, double mean_x)
{
    std::vector<double> ac(x.begin(), x.end());
    for (double& v : ac) {
        v -= mean_x;
    }
    return std::abs(dft_bin(ac, dt, f));
}

double wrap_deg(double a)
{
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a * 180.0 / std::numbers::pi;
}

} // namespace

WindowMetrics window_metrics(const Series& s, const Window& w)
{
    if (s.size() < 2) {
        throw WindowTooShort("window '" + w.name + "': series has fewer than two samples");
    }
    const double dt = s.time[1] - s.time[0];
    auto first = static_cast<std::size_t>(
        std::lower_bound(s.time.begin(), s.time.end(), w.t_start - 0.5 * dt) - s.time.begin());
    const auto last = static_cast<std::size_t>(
        std::lower_bound(s.time.begin(), s.time.end(), w.t_end - 0.5 * dt) - s.time.begin());
    if (last <= first + 1) {
        throw WindowTooShort("window '" + w.name + "' holds no samples");
    }

    const std::span<const double> om(s.omega.data() + first, last - first);
    const double omega = mean(om);
    const double f1 = omega / (2.0 * std::numbers::pi);
    const double span_t = static_cast<double>(last - first) * dt;
    const int cycles = static_cast<int>(std::floor((span_t + dt) * f1 + 1e-9));
    if (cycles < 5) {
        throw WindowTooShort("window '" + w.name + "' spans " + std::to_string(cycles) +
                             " periods; at least 5 are needed");
    }
    auto n = static_cast<std::size_t>(std::llround(cycles / (f1 * dt)));
    if (n > last - first) {
        // At most one sample short (a window ending at the run end): borrow
        // it from before the start rather than truncate the last period.
        if (first > 0) {
            first = last - n;
        } else {
            n = last - first;
        }
    }

    auto sub = [&](const std::vector<double>& v) {
        return std::span<const double>(v.data() + first, n);
    };

    WindowMetrics m;
    m.name = w.name;
    m.t_start = s.time[first];
    m.t_end = s.time[first] + static_cast<double>(n) * dt;
    m.cycles = cycles;
    m.freq = f1;
    m.omega_mean = mean(sub(s.omega));

    m.p_mean = mean(sub(s.p));
    m.p_ripple_2w = ripple(sub(s.p), dt, 2.0 * f1, m.p_mean);
    m.p_ripple_6w = ripple(sub(s.p), dt, 6.0 * f1, m.p_mean);
    m.q_mean = mean(sub(s.q));
    m.q_ripple_2w = ripple(sub(s.q), dt, 2.0 * f1, m.q_mean);
    m.q_ripple_6w = ripple(sub(s.q), dt, 6.0 * f1, m.q_mean);
    m.vdc_mean = mean(sub(s.v_dc));
    m.vdc_ripple_2w = ripple(sub(s.v_dc), dt, 2.0 * f1, m.vdc_mean);
    m.i_p_mean = mean(sub(s.i_p));

    const std::vector<double>* cur[3] = {&s.i_r, &s.i_s, &s.i_t};
    const std::vector<double>* vol[3] = {&s.u_r, &s.u_s, &s.u_t};
    for (int k = 0; k < 3; ++k) {
        const auto i = sub(*cur[k]);
        const auto i1 = dft_bin(i, dt, f1);
        const auto u1 = dft_bin(sub(*vol[k]), dt, f1);
        m.thd[k] = thd(i, dt, f1);
        m.current_fund[k] = std::abs(i1);
        m.current_lag_deg[k] = wrap_deg(std::arg(u1) - std::arg(i1));
        double peak = 0.0;
        for (double x : i) {
            peak = std::max(peak, std::abs(x));
        }
        m.current_peak[k] = peak;
    }

    const auto vf = sub(s.v_fault);
    const auto [lo, hi] = std::minmax_element(vf.begin(), vf.end());
    m.v_fault_min = *lo;
    m.v_fault_max = *hi;
    m.v_fault_mean = mean(vf);

    std::map<lvrt::Mode, std::size_t> counts;
    for (std::size_t k = first; k < first + n; ++k) {
        ++counts[s.mode[k]];
    }
    m.dominant_mode = std::max_element(counts.begin(), counts.end(), [](auto& a, auto& b) {
                          return a.second < b.second;
                      })->first;
    return m;
}

const WindowMetrics* MetricsReport::window(const std::string& name) const
{
    for (const auto& w : windows) {
        if (w.name == name) {
            return &w;
        }
    }
    return nullptr;
}

MetricsReport compute_metrics(const Series& s, const std::vector<Window>& windows,
                              double omega_ref)
{
    MetricsReport r;
    for (const auto& w : windows) {
        r.windows.push_back(window_metrics(s, w));
    }
    if (s.size() == 0) {
        return r;
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
        r.max_phase_current_peak =
            std::max({r.max_phase_current_peak, std::abs(s.i_r[k]), std::abs(s.i_s[k]),
                      std::abs(s.i_t[k])});
    }
    const auto [lo, hi] = std::minmax_element(s.v_fault.begin(), s.v_fault.end());
    r.v_fault_min = *lo;
    r.v_fault_max = *hi;

    r.omega_final = s.omega.back();
    const double band = 0.005 * omega_ref;
    r.omega_settle_time = 0.0;
    for (std::size_t k = s.size(); k-- > 0;) {
        if (std::abs(s.omega[k] - omega_ref) > band) {
            r.omega_settle_time = k + 1 < s.size() ? s.time[k + 1] : s.time[k];
            break;
        }
    }

    r.mode_timeline.push_back({s.time.front(), s.mode.front()});
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s.mode[k] != s.mode[k - 1]) {
            r.mode_timeline.push_back({s.time[k], s.mode[k]});
        }
    }
    return r;
}

} // namespace gridpv
