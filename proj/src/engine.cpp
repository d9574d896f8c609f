#include "gridpv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "gridpv/crg.hpp"
#include "gridpv/errors.hpp"
#include "gridpv/plant.hpp"
#include "gridpv/regulators.hpp"
#include "gridpv/sync.hpp"

namespace gridpv {

namespace {

using cplx = std::complex<double>;

cplx space_vector(const AlphaBeta& x) { return {x.alpha, x.beta}; }

struct Recorder {
    Series& s;
    void push(double t, const ThreePhase& u, const ThreePhase& i, double v_dc, double i_p,
              const AlphaBeta& u_ab, const AlphaBeta& i_ab, const ControllerSample& c)
    {
        s.time.push_back(t);
        s.u_r.push_back(u.r);
        s.u_s.push_back(u.s);
        s.u_t.push_back(u.t);
        s.i_r.push_back(i.r);
        s.i_s.push_back(i.s);
        s.i_t.push_back(i.t);
        s.v_dc.push_back(v_dc);
        s.i_p.push_back(i_p);
        s.p.push_back(crg::active_power(u_ab, i_ab));
        s.q.push_back(crg::reactive_power(u_ab, i_ab));
        s.v_fault.push_back(c.v_fault);
        s.omega.push_back(c.omega);
        s.mode.push_back(c.mode);
    }
};

// PCC voltage in phase quantities: the source keeps its own zero sequence,
// the Thevenin drop has none.
ThreePhase pcc_abc(const plant::PlantState& st, const AlphaBeta& m, const plant::GridSpec& grid,
                   const plant::PlantParams& params)
{
    const ThreePhase src = plant::grid_voltage(st.sim_time, grid);
    const AlphaBeta drop = plant::pcc_voltage(st, m, grid, params) - abc_to_alphabeta(src);
    const ThreePhase d = alphabeta_to_abc(drop);
    return {src.r + d.r, src.s + d.s, src.t + d.t};
}

} // namespace

double current_loop_crossover_hz(double kp, double v_dc, double l_filter)
{
    return kp * plant::k_pwm(v_dc) / (2.0 * std::numbers::pi * l_filter);
}

RunResult run_scenario(const Scenario& sc)
{
    RunResult out;
    out.scenario = sc.name;

    const plant::PvArray pv(sc.pv);
    const double ts = sc.plant_step;
    const double treg = sc.controller_step();
    const auto n_steps = static_cast<std::size_t>(std::llround(sc.duration / ts));
    const double omega_init = sc.control.omega_init.value_or(2.0 * std::numbers::pi * sc.grid.freq);

    sync::MsogiConfig mcfg = sc.control.sync;
    mcfg.omega_init = omega_init;
    sync::Msogi msogi(mcfg);

    regulators::PrHcRegulator reg_a(sc.control.current);
    regulators::PrHcRegulator reg_b(sc.control.current);

    lvrt::Supervisor supervisor(sc.lvrt, sc.lvrt_tuning, sc.pv.v_mpp, sc.pv.v_oc);

    regulators::PiState pi;
    pi.kp = sc.control.vdc_kp;
    pi.ki = sc.control.vdc_ki;
    pi.out_max = sc.lvrt.s_nom;

    // Initial operating point: MPP voltage, steady in-phase current carrying
    // the PV power net of filter loss, every regulator preloaded accordingly.
    plant::PlantState st;
    st.v_dc = sc.pv.v_mpp;
    const double g0 = sc.irradiance_at(0.0);
    const double p_pv0 = pv.power(st.v_dc, g0, sc.temperature);
    const AlphaBeta u0 = abc_to_alphabeta(plant::grid_voltage(0.0, sc.grid));
    const cplx u_sv = space_vector(u0);
    const double r_tot = sc.plant.r_filter + sc.grid.thevenin_r;
    const double l_tot = sc.plant.l_filter + sc.grid.thevenin_l;
    double p_ac0 = p_pv0;
    for (int k = 0; k < 3; ++k) {
        p_ac0 = p_pv0 - r_tot * p_ac0 * p_ac0 / std::norm(u_sv);
    }
    p_ac0 = std::clamp(p_ac0, 0.0, sc.lvrt.s_nom);
    pi.integral = p_ac0;

    msogi.preset(u0, omega_init);
    AlphaBeta m_pending;
    {
        const double w = omega_init;
        const cplx i_ref = u_sv * (p_ac0 / std::norm(u_sv));
        const cplx z{r_tot, w * l_tot};
        const double kpwm = plant::k_pwm(st.v_dc);
        const cplx lead = std::polar(1.0, 1.5 * w * treg); // sample delay plus hold
        const cplx g = reg_a.response(w, treg);
        // m = (u + z (i_ref - m/g)) lead / kpwm, solved for m.
        const cplx m = (u_sv + z * i_ref) * lead / kpwm / (1.0 + z * lead / (g * kpwm));
        const cplx e = m / g;
        const cplx i0 = i_ref - e;
        st.i_alpha = i0.real();
        st.i_beta = i0.imag();
        reg_a.preset(e, w, treg);
        reg_b.preset(-cplx(0.0, 1.0) * e, w, treg);
        const cplx m_now = m / lead;
        m_pending = {m_now.real(), m_now.imag()};
    }
    AlphaBeta m_applied = m_pending;

    out.series.reserve(n_steps);
    out.trace.reserve(n_steps / sc.controller_ratio + 1);
    Recorder rec{out.series};
    ControllerSample last;
    last.omega = omega_init;
    last.v_fault = 1.0;

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double t = static_cast<double>(n) * ts;
        st.sim_time = t;
        const double g = sc.irradiance_at(t);
        const bool tick = n % static_cast<std::size_t>(sc.controller_ratio) == 0;
        if (tick) {
            m_applied = m_pending;
        }

        const ThreePhase u_abc = pcc_abc(st, m_applied, sc.grid, sc.plant);
        const double i_p = pv.current(st.v_dc, g, sc.temperature);

        if (tick) {
            ControllerSample c;
            c.time = t;
            c.plant_index = n;
            c.m_applied = m_applied;

            const auto& est = msogi.step(u_abc, treg);
            c.omega = est.omega_est;
            c.v_fault = est.v_fault;
            c.fault_flag = est.fault_flag;

            const lvrt::SetPoints sp = supervisor.step(est, t, treg, st.v_dc, st.v_dc * i_p);
            c.mode = sp.mode;
            c.p_ref = sp.p_ref;
            c.q_ref = sp.q_ref;
            c.s_fault = sp.s_fault;
            c.p_limit = sp.p_limit;
            c.vdc_ref = sp.vdc_ref;

            if (sp.mode == lvrt::Mode::Disconnected) {
                if (!out.disconnected) {
                    out.disconnected = true;
                    out.disconnect_time = t;
                }
                st.connected = false;
                c.q_ref = 0.0;
                c.p_ref = 0.0;
                m_pending = {};
            } else {
                pi.out_max = std::min(sp.p_limit, sc.lvrt.s_nom);
                const auto pr = regulators::pi_vdc_step(pi, sp.vdc_ref, st.v_dc, treg);
                pi = pr.state;
                c.p_cmd = pr.output;

                const auto& fund = est.fundamental();
                try {
                    c.i_ref = crg::current_references(c.p_cmd, c.q_ref, fund.pos, fund.neg);
                } catch (const SequenceSingularity& e) {
                    // References undefined: zero them and leave the grid.
                    out.failed = true;
                    if (out.failure.empty()) {
                        out.failure = std::string("sequence singularity: ") + e.what();
                    }
                    supervisor.force_disconnect();
                    out.disconnected = true;
                    out.disconnect_time = t;
                    st.connected = false;
                    c.mode = lvrt::Mode::Disconnected;
                    c.p_cmd = c.q_ref = c.p_ref = 0.0;
                    c.i_ref = {};
                }

                if (st.connected) {
                    const AlphaBeta err = c.i_ref - st.current();
                    const AlphaBeta m{reg_a.step(err.alpha, est.omega_est, treg),
                                      reg_b.step(err.beta, est.omega_est, treg)};
                    const auto lim = regulators::modulation_limit(m, sc.control.m_max);
                    if (lim.saturated) {
                        reg_a.hold_last();
                        reg_b.hold_last();
                    }
                    c.saturated = lim.saturated;
                    m_pending = lim.m;
                } else {
                    m_pending = {};
                }
            }
            c.m_computed = m_pending;
            out.trace.push_back(c);
            last = c;
        }

        rec.push(t, u_abc, alphabeta_to_abc(st.current()), st.v_dc, i_p,
                 abc_to_alphabeta(u_abc), st.current(), last);

        try {
            st = plant::plant_step(st, {m_applied, g, sc.temperature}, sc.grid, pv, sc.plant, ts);
        } catch (const NumericalBlowup& e) {
            out.failed = true;
            out.failure = std::string("numerical blowup: ") + e.what();
            break;
        }
    }

    if (out.disconnected && !sc.expect_disconnect && out.failure.empty()) {
        out.failed = true;
        out.failure = "unexpected disconnection at t = " + std::to_string(out.disconnect_time) + " s";
    } else if (!out.disconnected && sc.expect_disconnect && !out.failed) {
        out.failed = true;
        out.failure = "expected a disconnection that did not happen";
    }

    std::vector<Window> windows = sc.windows;
    if (windows.empty()) {
        windows.push_back({"steady", 0.5 * sc.duration, sc.duration});
    }
    const double omega_ref = 2.0 * std::numbers::pi * plant::grid_frequency(sc.duration, sc.grid);
    out.metrics = compute_metrics(out.series, {}, omega_ref);
    for (const auto& w : windows) {
        try {
            out.metrics.windows.push_back(window_metrics(out.series, w));
        } catch (const WindowTooShort& e) {
            out.notes.push_back(e.what());
        }
    }
    return out;
}

} // namespace gridpv
