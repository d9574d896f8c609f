#include "gridpv/lvrt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridpv::lvrt {

std::string_view mode_name(Mode m)
{
    switch (m) {
        case Mode::NormalMppt:
            return "NormalMppt";
        case Mode::FaultNonMppt:
            return "FaultNonMppt";
        case Mode::FaultMppt:
            return "FaultMppt";
        case Mode::Disconnected:
            return "Disconnected";
    }
    return "Unknown";
}

RideThroughProfile::RideThroughProfile()
    : RideThroughProfile({{0.0, 0.0}, {0.5, 0.0}, {1.0, sync::kFaultThreshold}})
{
}

RideThroughProfile::RideThroughProfile(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints))
{
    if (points_.empty()) {
        throw std::invalid_argument("ride-through profile needs at least one breakpoint");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto [t, v] = points_[i];
        if (v < 0.0 || v > 1.0) {
            throw std::invalid_argument("ride-through voltages must lie in [0, 1]");
        }
        if (i > 0 && (t <= points_[i - 1].first || v < points_[i - 1].second)) {
            throw std::invalid_argument(
                "ride-through breakpoints need increasing times and non-decreasing voltages");
        }
    }
}

double RideThroughProfile::min_voltage(double t) const
{
    if (t <= points_.front().first) {
        return points_.front().second;
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const auto [t1, v1] = points_[i];
        if (t <= t1) {
            const auto [t0, v0] = points_[i - 1];
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    return points_.back().second;
}

double s_fault(const AlphaBeta& u_pos, const AlphaBeta& u_neg, double s_nom, double u_gnom_rms)
{
    const double s =
        (u_pos.magnitude() - u_neg.magnitude()) / (std::sqrt(3.0) * u_gnom_rms) * s_nom;
    return std::max(s, 0.0);
}

double q_requirement(double v_fault, double s_nom)
{
    if (v_fault >= 0.85) {
        return 0.0;
    }
    if (v_fault >= 0.5) {
        return 15.0 / 7.0 * s_nom * (0.85 - v_fault);
    }
    return 0.75 * s_nom;
}

PowerSplit p_fault(double s_fault, double q_req)
{
    if (q_req >= s_fault) {
        return {0.0, s_fault};
    }
    return {std::sqrt(s_fault * s_fault - q_req * q_req), q_req};
}

MpptState mppt_step(MpptState s, double v_dc, double p_now)
{
    // Hold while the voltage loop is still chasing the last perturbation;
    // power samples taken off the reference say nothing about the slope.
    if (s.track_window > 0.0 && std::abs(v_dc - s.vdc_ref) > s.track_window) {
        s.prev_power = p_now;
        return s;
    }
    if (p_now <= s.prev_power) {
        s.direction = -s.direction;
    }
    s.prev_power = p_now;
    s.vdc_ref = std::clamp(s.vdc_ref + s.direction * s.step, s.v_min, s.v_oc);
    return s;
}

MpptState non_mppt_step(MpptState s, double p_target, double p_now, double v_dc, double v_floor,
                        const NonMpptConfig& cfg)
{
    const double max_move = cfg.slew * cfg.period;
    const double move = std::clamp(cfg.gain * (p_now - p_target) * cfg.period, -max_move, max_move);
    s.direction = move >= 0.0 ? 1 : -1;
    s.prev_power = p_now;
    double ref = s.vdc_ref + move;
    if (move > 0.0) {
        ref = std::min(ref, std::max(v_dc, s.vdc_ref) + max_move);
    }
    s.vdc_ref = std::clamp(ref, std::min(v_floor, s.v_oc), s.v_oc);
    return s;
}

SetPoints supervisor_step(const sync::SyncEstimate& sync, double p_available_mpp,
                          double t_since_fault, SupervisorState& state,
                          const SupervisorConfig& cfg, double vdc_tracking, double vdc_derating)
{
    SetPoints sp;
    if (state.disconnected) {
        state.mode = Mode::Disconnected;
        sp.mode = Mode::Disconnected;
        sp.fault_signal = sync.fault_flag;
        sp.vdc_ref = vdc_derating;
        return sp;
    }

    const auto& fund = sync.fundamental();
    sp.s_fault = s_fault(fund.pos, fund.neg, cfg.s_nom, cfg.u_gnom_rms);
    sp.fault_signal = sync.fault_flag;

    if (!sync.fault_flag) {
        sp.mode = Mode::NormalMppt;
        sp.q_ref = 0.0;
        sp.p_limit = sp.s_fault;
        sp.p_ref = std::min(p_available_mpp, sp.p_limit);
        sp.vdc_ref = vdc_tracking;
        state.mode = sp.mode;
        return sp;
    }

    if (sync.v_fault < cfg.profile.min_voltage(t_since_fault)) {
        state.disconnected = true;
        state.mode = Mode::Disconnected;
        sp.mode = Mode::Disconnected;
        sp.s_fault = 0.0;
        sp.vdc_ref = vdc_derating;
        return sp;
    }

    const PowerSplit split = p_fault(sp.s_fault, q_requirement(sync.v_fault, cfg.s_nom));
    sp.q_ref = split.q_final;
    sp.p_limit = split.p_fault;
    if (split.p_fault > p_available_mpp) {
        sp.mode = Mode::FaultMppt;
        sp.p_ref = p_available_mpp;
        sp.vdc_ref = vdc_tracking;
    } else {
        sp.mode = Mode::FaultNonMppt;
        sp.p_ref = split.p_fault;
        sp.vdc_ref = vdc_derating;
    }
    state.mode = sp.mode;
    return sp;
}

Supervisor::Supervisor(SupervisorConfig cfg, SupervisorTuning tuning, double v_mpp_init,
                       double v_oc)
    : cfg_(std::move(cfg)), tuning_(tuning)
{
    tracker_.vdc_ref = v_mpp_init;
    tracker_.step = tuning_.mppt_step;
    tracker_.v_min = tuning_.v_min;
    tracker_.track_window = tuning_.track_window;
    tracker_.v_oc = v_oc;
    derating_ = tracker_;
    v_mpp_at_fault_ = v_mpp_init;
}

SetPoints Supervisor::step(const sync::SyncEstimate& sync, double t, double dt, double v_dc,
                           double p_pv)
{
    if (!power_seeded_) {
        p_filtered_ = p_pv;
        p_available_ = p_pv;
        power_seeded_ = true;
    }

    if (sync.fault_flag && !in_fault_) {
        in_fault_ = true;
        fault_start_ = t;
        v_mpp_at_fault_ = tracker_.vdc_ref;
        derating_ = tracker_;
    } else if (!sync.fault_flag && in_fault_) {
        in_fault_ = false;
        tracker_.prev_power = 0.0;
    }

    if (!in_fault_) {
        const double alpha = std::min(1.0, dt / tuning_.power_filter_tau);
        p_filtered_ += alpha * (p_pv - p_filtered_);
        p_available_ = p_filtered_;
    }

    SetPoints sp = supervisor_step(sync, p_available_, in_fault_ ? t - fault_start_ : 0.0, state_,
                                   cfg_, tracker_.vdc_ref, derating_.vdc_ref);

    if (t + 0.5 * dt >= next_search_) {
        next_search_ += tuning_.mppt_period;
        switch (sp.mode) {
            case Mode::NormalMppt:
            case Mode::FaultMppt:
                tracker_ = mppt_step(tracker_, v_dc, p_pv);
                sp.vdc_ref = tracker_.vdc_ref;
                break;
            case Mode::FaultNonMppt: {
                NonMpptConfig nm = tuning_.non_mppt;
                nm.period = tuning_.mppt_period;
                derating_ = non_mppt_step(derating_, sp.p_ref, p_pv, v_dc, v_mpp_at_fault_, nm);
                sp.vdc_ref = derating_.vdc_ref;
                break;
            }
            case Mode::Disconnected:
                break;
        }
    }
    return sp;
}

void Supervisor::force_disconnect()
{
    state_.disconnected = true;
    state_.mode = Mode::Disconnected;
}

void Supervisor::reset()
{
    state_ = {};
    in_fault_ = false;
    derating_ = tracker_;
}

} // namespace gridpv::lvrt
