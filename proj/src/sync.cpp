#include "gridpv/sync.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridpv::sync {

namespace {

// Discrete matrices of the trapezoidal rule for x' = A x + B u with
// A = w [[-k, -1], [1, 0]], B = w [k, 0]. With a = w dt / 2 and
// d = 1 + k a + a^2:
//   M = 1/d [[1 - k a - a^2, -2a], [2a, 1 + k a - a^2]]
//   N = 1/d [k a, k a^2]
//   x[n+1] = M x[n] + N (u[n] + u[n+1])
struct Trapezoid {
    double m00, m01, m10, m11;
    double n0, n1;
};

Trapezoid trapezoid(double k, double omega, double dt)
{
    const double a = 0.5 * omega * dt;
    const double inv_d = 1.0 / (1.0 + k * a + a * a);
    return {(1.0 - k * a - a * a) * inv_d, -2.0 * a * inv_d,
            2.0 * a * inv_d,               (1.0 + k * a - a * a) * inv_d,
            k * a * inv_d,                 k * a * a * inv_d};
}

} // namespace

SogiState sogi_step(SogiState state, double input, double omega_res, double dt)
{
    const Trapezoid c = trapezoid(state.gain, omega_res, dt);
    const double drive = state.prev_input + input;
    const double v = c.m00 * state.v_band + c.m01 * state.v_quad + c.n0 * drive;
    const double q = c.m10 * state.v_band + c.m11 * state.v_quad + c.n1 * drive;
    state.v_band = v;
    state.v_quad = q;
    state.prev_input = input;
    return state;
}

SogiAffine sogi_affine(const SogiState& state, double omega_res, double dt)
{
    const Trapezoid c = trapezoid(state.gain, omega_res, dt);
    return {c.n0, c.m00 * state.v_band + c.m01 * state.v_quad + c.n0 * state.prev_input};
}

FllState fll_step(FllState state, double error_quad, double amplitude_sq, double dt,
                  const FllConfig& cfg)
{
    const double norm = std::max(amplitude_sq, cfg.amplitude_floor);
    const double rate = -state.gamma * state.omega_est * cfg.gain / norm * error_quad;
    state.omega_est = std::clamp(state.omega_est + dt * rate, cfg.omega_min, cfg.omega_max);
    return state;
}

SequencePair pnsc(const AlphaBeta& filtered, const AlphaBeta& quad)
{
    return {{0.5 * (filtered.alpha - quad.beta), 0.5 * (quad.alpha + filtered.beta)},
            {0.5 * (filtered.alpha + quad.beta), 0.5 * (filtered.beta - quad.alpha)}};
}

FaultReading detect_fault(const AlphaBeta& pos_fundamental, double u_gnom_rms)
{
    const double v = pos_fundamental.magnitude() / (std::sqrt(3.0) * u_gnom_rms);
    return {v, v < kFaultThreshold};
}

const SequencePair& SyncEstimate::harmonic(int order) const
{
    for (const auto& h : per_harmonic) {
        if (h.order == order) {
            return h.seq;
        }
    }
    throw std::out_of_range("harmonic channel " + std::to_string(order) + " not configured");
}

Msogi::Msogi(MsogiConfig cfg) : cfg_(std::move(cfg))
{
    if (std::find(cfg_.harmonics.begin(), cfg_.harmonics.end(), 1) == cfg_.harmonics.end()) {
        throw std::invalid_argument("MSOGI requires the fundamental channel");
    }
    std::sort(cfg_.harmonics.begin(), cfg_.harmonics.end());
    cfg_.harmonics.erase(std::unique(cfg_.harmonics.begin(), cfg_.harmonics.end()),
                         cfg_.harmonics.end());
    for (int order : cfg_.harmonics) {
        if (order < 1) {
            throw std::invalid_argument("harmonic orders must be positive");
        }
        SogiState s;
        s.harmonic_index = order;
        s.gain = cfg_.sogi_gain / order;
        channels_.push_back({order, s, s});
        est_.per_harmonic.push_back({order, {}});
    }
    fll_.omega_est = cfg_.omega_init;
    fll_.gamma = cfg_.fll.gamma;
    est_.omega_est = fll_.omega_est;
}

void Msogi::preset(const AlphaBeta& u, double omega)
{
    for (auto& ch : channels_) {
        const bool fundamental = ch.order == 1;
        ch.alpha.v_band = fundamental ? u.alpha : 0.0;
        ch.alpha.v_quad = fundamental ? u.beta : 0.0;
        ch.beta.v_band = fundamental ? u.beta : 0.0;
        ch.beta.v_quad = fundamental ? -u.alpha : 0.0;
        ch.alpha.prev_input = fundamental ? u.alpha : 0.0;
        ch.beta.prev_input = fundamental ? u.beta : 0.0;
    }
    fll_.omega_est = std::clamp(omega, cfg_.fll.omega_min, cfg_.fll.omega_max);
    est_.omega_est = fll_.omega_est;
    for (auto& h : est_.per_harmonic) {
        h.seq = h.order == 1 ? SequencePair{u, {}} : SequencePair{};
    }
    const FaultReading r = detect_fault(u, cfg_.u_gnom_rms);
    est_.v_fault = r.v_fault;
    est_.fault_flag = r.raw_flag;
    debounce_count_ = 0;
}

const SyncEstimate& Msogi::step(const ThreePhase& u_abc, double dt)
{
    const AlphaBeta u = abc_to_alphabeta(u_abc);
    const double omega = fll_.omega_est;
    const std::size_t n = channels_.size();

    // Each channel sees u minus the other channels' band-pass outputs of the
    // same sample. With v_i = g_i x_i + h_i the coupled equations have the
    // closed form S = (u G + H) / (1 + G), G = sum g/(1-g), H = sum h/(1-g).
    auto solve_axis = [&](double input, auto member) {
        double big_g = 0.0;
        double big_h = 0.0;
        thread_local std::vector<SogiAffine> aff;
        aff.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const SogiState& s = channels_[i].*member;
            aff[i] = sogi_affine(s, channels_[i].order * omega, dt);
            big_g += aff[i].slope / (1.0 - aff[i].slope);
            big_h += aff[i].offset / (1.0 - aff[i].slope);
        }
        const double sum = (input * big_g + big_h) / (1.0 + big_g);
        for (std::size_t i = 0; i < n; ++i) {
            const double y = (aff[i].slope * (input - sum) + aff[i].offset) / (1.0 - aff[i].slope);
            const double x = input - sum + y;
            SogiState& s = channels_[i].*member;
            s = sogi_step(s, x, channels_[i].order * omega, dt);
        }
        return sum;
    };
    const double sum_alpha = solve_axis(u.alpha, &Channel::alpha);
    const double sum_beta = solve_axis(u.beta, &Channel::beta);

    for (std::size_t i = 0; i < n; ++i) {
        const Channel& ch = channels_[i];
        est_.per_harmonic[i].seq =
            pnsc({ch.alpha.v_band, ch.beta.v_band}, {ch.alpha.v_quad, ch.beta.v_quad});
    }

    // The fundamental channel's input error equals the total residual u - sum.
    const Channel& f = channels_.front();
    const double err_alpha = u.alpha - sum_alpha;
    const double err_beta = u.beta - sum_beta;
    const double error_quad = err_alpha * f.alpha.v_quad + err_beta * f.beta.v_quad;
    const double amp_sq = f.alpha.v_band * f.alpha.v_band + f.beta.v_band * f.beta.v_band;
    fll_ = fll_step(fll_, error_quad, amp_sq, dt, cfg_.fll);
    est_.omega_est = fll_.omega_est;

    const FaultReading r = detect_fault(est_.per_harmonic.front().seq.pos, cfg_.u_gnom_rms);
    est_.v_fault = r.v_fault;
    if (r.raw_flag != est_.fault_flag) {
        if (++debounce_count_ >= cfg_.debounce_samples) {
            est_.fault_flag = r.raw_flag;
            debounce_count_ = 0;
        }
    } else {
        debounce_count_ = 0;
    }
    return est_;
}

} // namespace gridpv::sync
