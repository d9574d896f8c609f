#include <doctest.h>

#include <stdexcept>

#include <random>
#include <vector>

#include "gridpv/engine.hpp"
#include "gridpv/regulators.hpp"
#include "support.hpp"

using namespace gridpv;
using namespace gridpv::regulators;
using testing::kPi;
using testing::kTreg;

TEST_SUITE("regulators")
{
    TEST_CASE("PR core at resonance has gain kp + ki")
    {
        PrHcConfig cfg;
        cfg.hc_enabled = false;
        const PrHcRegulator reg(cfg);
        for (double f : {50.0, 60.0}) {
            const std::complex<double> g = reg.response(2 * kPi * f, kTreg);
            CHECK(std::abs(g) == doctest::Approx(cfg.kp + cfg.ki).epsilon(1e-9));
            CHECK(std::abs(std::arg(g)) < 1e-9);
        }
    }

    TEST_CASE("preset lands in the periodic steady state")
    {
        PrHcConfig cfg;
        PrHcRegulator reg(cfg);
        const double w = 2 * kPi * 50;
        const std::complex<double> e = std::polar(12.0, 0.7);
        reg.preset(e, w, kTreg);
        const std::complex<double> g = reg.response(w, kTreg);
        double worst = 0.0;
        for (int n = 0; n < 2000; ++n) {
            const std::complex<double> rot = std::polar(1.0, w * n * kTreg);
            const double y = reg.step((e * rot).real(), w, kTreg);
            worst = std::max(worst, std::abs(y - (g * e * rot).real()));
        }
        CHECK(worst < 1e-9 * std::abs(g * e));
    }

    TEST_CASE("simulated PR output settles to kp + ki on a sinusoidal error")
    {
        PrHcConfig cfg;
        cfg.hc_enabled = false;
        cfg.wc = 50.0; // short time constant so the transient fits in the test
        PrHcRegulator reg(cfg);
        const double w = 2 * kPi * 50;
        double peak = 0.0;
        const int n = static_cast<int>(1.0 / kTreg);
        for (int k = 0; k < n; ++k) {
            const double y = reg.step(std::sin(w * k * kTreg), w, kTreg);
            if (k > n - static_cast<int>(0.02 / kTreg)) {
                peak = std::max(peak, std::abs(y));
            }
        }
        CHECK(peak == doctest::Approx(cfg.kp + cfg.ki).epsilon(2e-3));
    }

    TEST_CASE("resonant cells reject DC")
    {
        ResonantCellState c = make_cell(1, 0.1, 1.0);
        CHECK(std::abs(cell_response(c, 0.0, 2 * kPi * 50, kTreg)) < 1e-12);
        PrHcConfig cfg;
        cfg.wc = 100.0;
        PrHcRegulator reg(cfg);
        double y = 0.0;
        for (int k = 0; k < static_cast<int>(0.5 / kTreg); ++k) {
            y = reg.step(3.0, 2 * kPi * 50, kTreg);
        }
        CHECK(y == doctest::Approx(cfg.kp * 3.0).epsilon(1e-6));
    }

    TEST_CASE("harmonic compensator gain at the fifth")
    {
        const double w = 2 * kPi * 50;
        PrHcConfig on;
        const ResonantCellState c5 = make_cell(5, on.ki_hc, on.wc);
        const std::complex<double> g5 = cell_response(c5, 5 * w, w, kTreg);
        CHECK(std::abs(g5) == doctest::Approx(on.ki_hc).epsilon(1e-9));

        PrHcConfig off = on;
        off.hc_enabled = false;
        const PrHcRegulator reg(off);
        std::complex<double> g{};
        for (const auto& c : reg.cells()) {
            g += cell_response(c, 5 * w, w, kTreg);
        }
        CHECK(std::abs(g) < 0.01 * off.ki);
    }

    TEST_CASE("resonance peaks follow the estimated frequency")
    {
        for (double f : {50.0, 60.0}) {
            for (int h : {1, 5, 7, 11, 13}) {
                const ResonantCellState c = make_cell(h, 0.1, 1.0);
                double best_f = 0.0, best = 0.0;
                for (double fe = h * f - 2.0; fe <= h * f + 2.0; fe += 0.005) {
                    const double m = std::abs(cell_response(c, 2 * kPi * fe, 2 * kPi * f, kTreg));
                    if (m > best) {
                        best = m;
                        best_f = fe;
                    }
                }
                CAPTURE(f);
                CAPTURE(h);
                CHECK(std::abs(best_f - h * f) < 0.1);
            }
        }
    }

    TEST_CASE("coefficients retune only beyond the threshold")
    {
        ResonantCellState c = make_cell(1, 0.1, 1.0);
        resonant_cell_step(c, 0.0, 314.0, kTreg);
        const double b0 = c.b0;
        resonant_cell_step(c, 0.0, 314.0 + 0.5 * kRetuneThreshold, kTreg);
        CHECK(c.b0 == b0);
        resonant_cell_step(c, 0.0, 314.0 + 3 * kRetuneThreshold, kTreg);
        CHECK(c.omega_cached == doctest::Approx(314.0 + 3 * kRetuneThreshold));
    }

    TEST_CASE("cells stay bounded for a million bounded samples")
    {
        PrHcConfig cfg;
        PrHcRegulator reg(cfg);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 1000000; ++k) {
            worst = std::max(worst, std::abs(reg.step(d(rng), 2 * kPi * 50, kTreg)));
        }
        CHECK(std::isfinite(worst));
        CHECK(worst < 10.0);
    }

    TEST_CASE("cell construction is validated")
    {
        CHECK_THROWS_AS(make_cell(0, 0.1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(make_cell(1, 0.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(make_cell(1, 0.1, -1.0), std::invalid_argument);
    }

    TEST_CASE("DC-link PI arithmetic")
    {
        PiState s;
        const PiResult zero = pi_vdc_step(s, 800.0, 800.0, kTreg);
        CHECK(zero.output == 0.0);

        const double dt = 1e-4;
        PiResult r{0.0, s};
        for (int k = 0; k < 100; ++k) {
            r = pi_vdc_step(r.state, 800.0, 801.0, dt);
        }
        CHECK(r.output == doctest::Approx(3977.5 + 1521.1).epsilon(1e-6));
    }

    TEST_CASE("DC-link PI: excess voltage raises power, output stays clamped")
    {
        PiState s;
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> d(-300.0, 300.0);
        PiResult r{0.0, s};
        for (int k = 0; k < 20000; ++k) {
            r = pi_vdc_step(r.state, 800.0, 800.0 + d(rng), kTreg);
            REQUIRE(r.output >= s.out_min);
            REQUIRE(r.output <= s.out_max);
        }
        const PiResult up = pi_vdc_step(PiState{}, 800.0, 810.0, kTreg);
        CHECK(up.output > 0.0);
        const PiResult down = pi_vdc_step(PiState{}, 800.0, 790.0, kTreg);
        CHECK(down.output == 0.0);
    }

    TEST_CASE("back-calculation unwinds quickly after saturation")
    {
        PiResult r{0.0, PiState{}};
        for (int k = 0; k < 100000; ++k) { // 4 s pinned at the upper clamp
            r = pi_vdc_step(r.state, 800.0, 1000.0, kTreg);
        }
        CHECK(r.output == r.state.out_max);
        CHECK(r.state.integral < 2.0 * r.state.out_max);
        int k = 0;
        for (; k < 100000 && r.output >= r.state.out_max; ++k) {
            r = pi_vdc_step(r.state, 800.0, 795.0, kTreg);
        }
        CHECK(k * kTreg < 0.05);
    }

    TEST_CASE("modulation limit")
    {
        const ModulationResult a = modulation_limit({0.5, 0.0}, 1.0);
        CHECK_FALSE(a.saturated);
        CHECK(a.m.alpha == 0.5);
        const ModulationResult b = modulation_limit({3.0, 4.0}, 1.0);
        CHECK(b.saturated);
        CHECK(b.m.alpha == doctest::Approx(0.6));
        CHECK(b.m.beta == doctest::Approx(0.8));
    }

    TEST_CASE("hold_last undoes the step taken under saturation and release stays bounded")
    {
        PrHcConfig cfg;
        const double w = 2 * kPi * 50;
        PrHcRegulator held(cfg), free_run(cfg);
        held.preset({5.0, 0.0}, w, kTreg);
        free_run.preset({5.0, 0.0}, w, kTreg);
        const auto before = held.cells()[0];
        held.step(1e3, w, kTreg);
        held.hold_last();
        CHECK(held.cells()[0].x1 == before.x1);
        CHECK(held.cells()[0].x2 == before.x2);

        // Saturated for 5 cycles with a large error, then released.
        const int sat = static_cast<int>(0.1 / kTreg);
        for (int k = 0; k < sat; ++k) {
            held.step(200.0 * std::sin(w * k * kTreg), w, kTreg);
            held.hold_last();
        }
        double worst_held = 0.0, worst_free = 0.0;
        for (int k = sat; k < sat + static_cast<int>(0.04 / kTreg); ++k) {
            const double e = 5.0 * std::cos(w * k * kTreg);
            worst_held = std::max(worst_held, std::abs(held.step(e, w, kTreg)));
            worst_free = std::max(worst_free, std::abs(free_run.step(e, w, kTreg)));
        }
        CHECK(worst_held <= 1.01 * worst_free);
    }

    TEST_CASE("current-loop crossover with the default gains")
    {
        const double f = current_loop_crossover_hz(0.0011, 807.4, 0.15e-3);
        CHECK(std::abs(f / 610.4 - 1.0) < 0.05);
    }
}
