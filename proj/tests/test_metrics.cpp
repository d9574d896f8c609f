#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "gridpv/errors.hpp"
#include "gridpv/metrics.hpp"
#include "support.hpp"

using namespace gridpv;
using testing::kPi;

namespace {

constexpr double kDt = 5.1196e-6;

// Synthetic record: balanced voltage of amplitude 325 V, current lagging by
// `lag` radians, p and q from caller-supplied functions of time.
Series synthetic(double duration, double f, double lag, std::function<double(double)> p,
                 std::function<double(double)> q, double dt = kDt)
{
    Series s;
    const double w = 2 * kPi * f;
    for (int k = 0; k * dt < duration - 0.5 * dt; ++k) {
        const double t = k * dt;
        const ThreePhase u = testing::three_phase(325.0, w * t);
        const ThreePhase i = testing::three_phase(100.0, w * t - lag);
        s.time.push_back(t);
        s.u_r.push_back(u.r);
        s.u_s.push_back(u.s);
        s.u_t.push_back(u.t);
        s.i_r.push_back(i.r);
        s.i_s.push_back(i.s);
        s.i_t.push_back(i.t);
        s.v_dc.push_back(800.0);
        s.i_p.push_back(600.0);
        s.p.push_back(p(t));
        s.q.push_back(q(t));
        s.v_fault.push_back(1.0);
        s.omega.push_back(w);
        s.mode.push_back(lvrt::Mode::NormalMppt);
    }
    return s;
}

} // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("single-bin DFT recovers amplitude and phase")
    {
        std::vector<double> x;
        for (int k = 0; k * kDt < 0.1; ++k) {
            x.push_back(3.0 * std::cos(2 * kPi * 50 * k * kDt + 0.4));
        }
        const std::size_t n = static_cast<std::size_t>(std::llround(0.1 / kDt));
        x.resize(n);
        const auto c = dft_bin(x, kDt, 50.0);
        CHECK(std::abs(c) == doctest::Approx(3.0).epsilon(1e-4));
        CHECK(std::arg(c) == doctest::Approx(0.4).epsilon(1e-3));
    }

    TEST_CASE("THD of a pure sine vanishes and of a known mix is exact")
    {
        const double dt = 1e-5;
        std::vector<double> pure, mix;
        for (int k = 0; k < 4000; ++k) { // 2 cycles at 50 Hz
            const double th = 2 * kPi * 50 * k * dt;
            pure.push_back(std::sin(th));
            mix.push_back(std::sin(th) + 0.03 * std::sin(5 * th) + 0.04 * std::sin(7 * th));
        }
        CHECK(thd(pure, dt, 50.0) < 1e-9);
        CHECK(thd(mix, dt, 50.0) == doctest::Approx(0.05).epsilon(1e-9));
    }

    TEST_CASE("mean and double-frequency ripple of the power")
    {
        const double w = 2 * kPi * 50;
        auto p = [&](double t) { return 100.0 + 10.0 * std::cos(2 * w * t); };
        auto q = [&](double t) { return -5.0 + 2.0 * std::sin(6 * w * t); };
        // 2000 samples per period: the analysis span is exactly ten periods.
        const Series s = synthetic(0.3, 50.0, 0.0, p, q, 1e-5);
        const WindowMetrics m = window_metrics(s, {"w", 0.1, 0.3});
        CHECK(m.cycles == 10);
        CHECK(m.freq == doctest::Approx(50.0));
        CHECK(m.p_mean == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(m.p_ripple_2w == doctest::Approx(10.0).epsilon(1e-9));
        CHECK(m.p_ripple_6w < 1e-9);
        CHECK(m.q_mean == doctest::Approx(-5.0).epsilon(1e-9));
        CHECK(m.q_ripple_6w == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(m.vdc_mean == doctest::Approx(800.0));
        CHECK(m.vdc_ripple_2w < 1e-9);
    }

    TEST_CASE("ripple at the plant step, where a period is not a whole number of samples")
    {
        const double w = 2 * kPi * 50;
        const Series s = synthetic(
            0.3, 50.0, 0.0, [&](double t) { return 100.0 + 10.0 * std::cos(2 * w * t); },
            [&](double t) { return -5.0 + 2.0 * std::sin(6 * w * t); });
        const WindowMetrics m = window_metrics(s, {"w", 0.1, 0.3});
        CHECK(m.cycles == 10);
        CHECK(m.p_mean == doctest::Approx(100.0).epsilon(1e-5));
        CHECK(m.p_ripple_2w == doctest::Approx(10.0).epsilon(1e-4));
        CHECK(m.p_ripple_6w < 1e-3); // leakage of the 2w term
        CHECK(m.q_ripple_6w == doctest::Approx(2.0).epsilon(1e-4));
        CHECK(m.vdc_ripple_2w < 1e-9);
    }

    TEST_CASE("per-phase currents: peak, fundamental, lag")
    {
        const Series s = synthetic(0.2, 60.0, kPi / 6, [](double) { return 0.0; },
                                   [](double) { return 0.0; });
        const WindowMetrics m = window_metrics(s, {"w", 0.05, 0.2});
        for (int k = 0; k < 3; ++k) {
            CHECK(m.current_fund[k] == doctest::Approx(100.0).epsilon(1e-4));
            CHECK(m.current_peak[k] == doctest::Approx(100.0).epsilon(1e-4));
            CHECK(m.current_lag_deg[k] == doctest::Approx(30.0).epsilon(1e-4));
            CHECK(m.thd[k] < 1e-4);
        }
        CHECK(m.max_current_peak() == doctest::Approx(100.0).epsilon(1e-4));
        CHECK(m.dominant_mode == lvrt::Mode::NormalMppt);
    }

    TEST_CASE("windows shorter than five periods are refused")
    {
        const Series s = synthetic(0.2, 50.0, 0.0, [](double) { return 0.0; },
                                   [](double) { return 0.0; });
        CHECK_THROWS_AS(window_metrics(s, {"short", 0.0, 0.09}), WindowTooShort);
        CHECK_THROWS_AS(window_metrics(s, {"empty", 0.5, 0.6}), WindowTooShort);
        CHECK_NOTHROW(window_metrics(s, {"ok", 0.0, 0.1}));
    }

    TEST_CASE("run-level report: settle time, extremes and timeline")
    {
        Series s = synthetic(0.3, 50.0, 0.0, [](double) { return 0.0; },
                             [](double) { return 0.0; });
        const double w = 2 * kPi * 50;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (s.time[k] < 0.1) {
                s.omega[k] = 2 * kPi * 45;
            }
            if (s.time[k] >= 0.2) {
                s.mode[k] = lvrt::Mode::FaultNonMppt;
                s.v_fault[k] = 0.5;
            }
        }
        const MetricsReport r = compute_metrics(s, {{"a", 0.1, 0.2}}, w);
        CHECK(r.omega_settle_time == doctest::Approx(0.1).epsilon(1e-3));
        CHECK(r.omega_final == w);
        CHECK(r.v_fault_min == 0.5);
        CHECK(r.v_fault_max == 1.0);
        REQUIRE(r.mode_timeline.size() == 2);
        CHECK(r.mode_timeline[1].mode == lvrt::Mode::FaultNonMppt);
        CHECK(r.mode_timeline[1].time == doctest::Approx(0.2).epsilon(1e-4));
        REQUIRE(r.window("a") != nullptr);
        CHECK(r.window("missing") == nullptr);
        CHECK(r.max_phase_current_peak == doctest::Approx(100.0).epsilon(1e-6));
    }
}
