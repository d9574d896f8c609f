#include <doctest.h>

#include <random>
#include <vector>

#include "gridpv/crg.hpp"
#include "gridpv/errors.hpp"
#include "gridpv/lvrt.hpp"
#include "gridpv/metrics.hpp"
#include "support.hpp"

using namespace gridpv;
using namespace gridpv::crg;
using testing::kPi;

namespace {

struct SeqPair {
    double a_pos, phi_pos, a_neg, phi_neg;
    AlphaBeta pos(double wt) const { return {a_pos * std::cos(wt + phi_pos), a_pos * std::sin(wt + phi_pos)}; }
    AlphaBeta neg(double wt) const { return {a_neg * std::cos(wt + phi_neg), -a_neg * std::sin(wt + phi_neg)}; }
};

SeqPair random_pair(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> amp(10.0, 400.0), ratio(0.0, 0.95), ph(-kPi, kPi);
    const double ap = amp(rng);
    return {ap, ph(rng), ap * ratio(rng), ph(rng)};
}

} // namespace

TEST_SUITE("crg")
{
    TEST_CASE("power decomposition examples")
    {
        const PowerDecomposition a = instantaneous_powers({100, 0}, {0, 0}, {2, 0}, {0, 0});
        CHECK(a.p_avg_pos == 200.0);
        CHECK(a.p_avg_neg == 0.0);
        CHECK(a.p_osc == 0.0);
        CHECK(a.q_total() == 0.0);

        const PowerDecomposition b = instantaneous_powers({100, 0}, {0, 0}, {0, 2}, {0, 0});
        CHECK(b.q_avg_pos == -200.0);
        CHECK(b.p_total() == 0.0);

        const PowerDecomposition c = instantaneous_powers({100, 0}, {20, 0}, {1, 0}, {0.5, 0});
        CHECK(c.p_avg_pos == 100.0);
        CHECK(c.p_avg_neg == doctest::Approx(10.0));
        CHECK(c.p_osc == doctest::Approx(70.0));
    }

    TEST_CASE("decomposition totals equal the direct products")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> d(-300, 300);
        for (int k = 0; k < 500; ++k) {
            const AlphaBeta up{d(rng), d(rng)}, un{d(rng), d(rng)}, ip{d(rng), d(rng)}, in{d(rng), d(rng)};
            const PowerDecomposition pd = instantaneous_powers(up, un, ip, in);
            const AlphaBeta u = up + un, i = ip + in;
            CHECK(std::abs(pd.p_total() - active_power(u, i)) <= 1e-9 * (1.0 + std::abs(active_power(u, i))));
            CHECK(std::abs(pd.q_total() - reactive_power(u, i)) <= 1e-9 * (1.0 + std::abs(reactive_power(u, i))));
        }
    }

    TEST_CASE("k_split")
    {
        CHECK(k_split({300, 0}, {0, 0}) == 1.0);
        CHECK(k_split({300, 0}, {0, 300}) == 0.5);
        CHECK(k_split({1.0, 0}, {0.2, 0}) == doctest::Approx(1.0 / 1.04));
        CHECK_THROWS_AS(k_split({0.1, 0}, {0.1, 0}), DegenerateVoltage);
    }

    TEST_CASE("balanced references are in phase or in quadrature")
    {
        for (double th : {0.0, 1.0, 2.5}) {
            const AlphaBeta u{398.37 * std::cos(th), 398.37 * std::sin(th)};
            const AlphaBeta ip = current_references(500e3, 0.0, u, {});
            CHECK(ip.alpha == doctest::Approx(u.alpha * 500e3 / u.norm_sq()));
            CHECK(ip.beta == doctest::Approx(u.beta * 500e3 / u.norm_sq()));
            CHECK(ip.magnitude() == doctest::Approx(500e3 / 398.37));

            const AlphaBeta iq = current_references(0.0, 50e3, u, {});
            CHECK(std::abs(active_power(u, iq)) < 1e-6);
            CHECK(reactive_power(u, iq) == doctest::Approx(50e3));
            // Lagging: the current is the voltage rotated by -90 degrees.
            const AlphaBeta lag = -1.0 * quadrature(u);
            CHECK(iq.alpha * lag.alpha + iq.beta * lag.beta == doctest::Approx(iq.magnitude() * lag.magnitude()));
        }
    }

    TEST_CASE("constant active power over a period for random unbalance")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> pq(0.0, 5e5);
        for (int trial = 0; trial < 200; ++trial) {
            const SeqPair sp = random_pair(rng);
            const double p = pq(rng), q = pq(rng);
            for (int n = 0; n < 64; ++n) {
                const double wt = 2 * kPi * n / 64;
                const AlphaBeta up = sp.pos(wt), un = sp.neg(wt);
                const AlphaBeta i = current_references(p, q, up, un);
                REQUIRE(std::abs(active_power(up + un, i) - p) <= 1e-6 * std::max(p, 1.0) + 1e-6);
                const AlphaBeta iq = current_references(0.0, q, up, un);
                REQUIRE(std::abs(active_power(up + un, iq)) <= 1e-9 * (1.0 + q / sp.a_pos));
            }
        }
    }

    TEST_CASE("oscillating active power vanishes for the P part")
    {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            const SeqPair sp = random_pair(rng);
            const double wt = 0.37 * trial;
            const AlphaBeta up = sp.pos(wt), un = sp.neg(wt);
            const double delta = up.norm_sq() - un.norm_sq();
            const double p = 1e5;
            // Sequence parts of the P-current.
            const AlphaBeta ip = (p / delta) * up;
            const AlphaBeta in = -(p / delta) * un;
            const AlphaBeta total = current_references(p, 0.0, up, un);
            CHECK(std::abs(total.alpha - (ip + in).alpha) < 1e-9 * (1.0 + total.magnitude()));
            const PowerDecomposition pd = instantaneous_powers(up, un, ip, in);
            CHECK(std::abs(pd.p_osc) < 1e-9 * p);
        }
    }

    TEST_CASE("split form reduces to the direct form")
    {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> pq(-5e5, 5e5);
        for (int trial = 0; trial < 500; ++trial) {
            const SeqPair sp = random_pair(rng);
            const double wt = 0.11 * trial;
            const AlphaBeta up = sp.pos(wt), un = sp.neg(wt);
            const double p = pq(rng), q = pq(rng);
            const AlphaBeta a = current_references(p, q, up, un);
            const AlphaBeta b = current_references_split(p, q, up, un, k_split(up, un));
            const double scale = std::max(a.magnitude(), 1e-9);
            REQUIRE(std::abs(a.alpha - b.alpha) <= 1e-9 * scale);
            REQUIRE(std::abs(a.beta - b.beta) <= 1e-9 * scale);
        }
    }

    TEST_CASE("singular sequence pair raises")
    {
        CHECK_THROWS_AS(current_references(1e5, 0, {100, 0}, {100, 0}), SequenceSingularity);
        CHECK_THROWS_AS(current_references(1e5, 0, {10, 0}, {20, 0}), SequenceSingularity);
        CHECK_THROWS_AS(reference_envelope(1e5, 0, 100, 100, 0.5), EnvelopeSingularity);
    }

    TEST_CASE("envelope shapes")
    {
        const ReferenceEnvelope none = reference_envelope(5e5, 0.0, 398.37, 0.0, 1.0);
        CHECK(none.i_p_large == doctest::Approx(none.i_p_short));
        CHECK(none.i_q_large == 0.0);
        CHECK(none.k_alpha == doctest::Approx(none.k_beta));

        const ReferenceEnvelope deep = reference_envelope(0.0, 50e3, 39.837, 0.0, 1.0);
        CHECK(deep.i_q_large == doctest::Approx(deep.i_q_short));
        CHECK(deep.i_p_large == 0.0);
        CHECK(deep.k_alpha == doctest::Approx(deep.k_beta));

        const double up = 2.5 / 3.0 * 398.37, un = 0.5 / 3.0 * 398.37;
        const double kp = up * up / (up * up + un * un);
        const ReferenceEnvelope e = reference_envelope(3e5, 2e4, up, un, kp);
        CHECK(e.k_alpha < e.k_beta);
        CHECK(e.k_alpha == doctest::Approx(std::hypot(e.i_p_short, e.i_q_short)));
        CHECK(e.k_beta == doctest::Approx(std::hypot(e.i_p_large, e.i_q_large)));
    }

    TEST_CASE("envelope matches the sampled trajectory extrema")
    {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> pq(0.0, 5e5);
        for (int trial = 0; trial < 200; ++trial) {
            SeqPair sp = random_pair(rng);
            sp.phi_pos = sp.phi_neg = 0.0; // aligned at t = 0
            const double p = pq(rng), q = pq(rng);
            const double kp = sp.a_pos * sp.a_pos / (sp.a_pos * sp.a_pos + sp.a_neg * sp.a_neg);
            const ReferenceEnvelope e = reference_envelope(p, q, sp.a_pos, sp.a_neg, kp);
            double max_a = 0.0, max_b = 0.0;
            const int n = 20000;
            for (int k = 0; k < n; ++k) {
                const double wt = 2 * kPi * k / n;
                const AlphaBeta i = current_references(p, q, sp.pos(wt), sp.neg(wt));
                max_a = std::max(max_a, std::abs(i.alpha));
                max_b = std::max(max_b, std::abs(i.beta));
                REQUIRE(std::abs(i.alpha - e.k_alpha * std::cos(wt + e.theta_alpha)) <= 1e-9 * (1 + e.k_beta));
                REQUIRE(std::abs(i.beta - e.k_beta * std::sin(wt + e.theta_beta)) <= 1e-9 * (1 + e.k_beta));
            }
            CHECK(testing::rel(max_a, e.k_alpha) < 1e-4);
            CHECK(testing::rel(max_b, e.k_beta) < 1e-4);
        }
    }

    TEST_CASE("the apparent-power capability pins the major semi-axis at the nominal current")
    {
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> frac(0.0, 1.0);
        const double s_nom = 506.91e3, u_nom = 230.0;
        const double k_nominal = s_nom / (std::sqrt(3.0) * u_nom);
        for (int trial = 0; trial < 200; ++trial) {
            SeqPair sp = random_pair(rng);
            const double sf = lvrt::s_fault(sp.pos(0), sp.neg(0), s_nom, u_nom);
            if (sf <= 0.0) {
                continue;
            }
            const double angle = frac(rng) * kPi / 2;
            const double kp = sp.a_pos * sp.a_pos / (sp.a_pos * sp.a_pos + sp.a_neg * sp.a_neg);
            const ReferenceEnvelope e =
                reference_envelope(sf * std::cos(angle), sf * std::sin(angle), sp.a_pos, sp.a_neg, kp);
            CHECK(e.k_beta == doctest::Approx(k_nominal).epsilon(1e-9));
            CHECK(e.k_alpha <= e.k_beta * (1 + 1e-12));
        }
    }

    TEST_CASE("unbalanced references are undistorted sinusoids per phase")
    {
        const double w = 2 * kPi * 50;
        const double dt = testing::kTreg;
        const SeqPair sp{333.0, 0.3, 66.0, -0.8};
        const int n = static_cast<int>(std::round(5 * 0.02 / dt));
        std::vector<double> r, s, t;
        for (int k = 0; k < n; ++k) {
            const ThreePhase i = alphabeta_to_abc(current_references(3e5, 4e4, sp.pos(w * k * dt), sp.neg(w * k * dt)));
            r.push_back(i.r);
            s.push_back(i.s);
            t.push_back(i.t);
        }
        const double f = 1.0 / (n * dt / 5.0);
        for (const auto* x : {&r, &s, &t}) {
            CHECK(gridpv::thd(*x, dt, f) < 1e-3);
        }
    }
}
