#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridpv/plant.hpp"

namespace gridpv::plant {

namespace {

constexpr double kStcKelvin = 298.15;

struct DiodeParams {
    double i_ph;
    double i_0;
    double a;
    double r_s;
    double r_sh;
};

// Iph and I0 follow linearly from the short-circuit and open-circuit anchors
// once (a, Rs) are fixed.
bool anchor_currents(const PvArrayModel& m, double a, double r_s, double& i_ph, double& i_0)
{
    const double e1 = std::expm1(m.i_sc * r_s / a);
    const double e2 = std::expm1(m.v_oc / a);
    const double b1 = m.i_sc * (1.0 + r_s / m.r_shunt);
    const double b2 = m.v_oc / m.r_shunt;
    const double det = e1 - e2; // system [1 -e1; 1 -e2] [Iph I0]^T = [b1 b2]^T
    if (!std::isfinite(det) || det == 0.0) {
        return false;
    }
    i_0 = (b1 - b2) / (e2 - e1);
    i_ph = b1 + i_0 * e1;
    return std::isfinite(i_0) && i_0 > 0.0;
}

double mpp_current_residual(const PvArrayModel& m, double a, double r_s)
{
    double i_ph = 0.0;
    double i_0 = 0.0;
    if (!anchor_currents(m, a, r_s, i_ph, i_0)) {
        return -1e9;
    }
    const double vd = m.v_mpp + m.i_mpp * r_s;
    return i_ph - i_0 * std::expm1(vd / a) - vd / m.r_shunt - m.i_mpp;
}

// dP/dV at the MPP vanishes iff dI/dV = -Imp/Vmp.
double mpp_slope_residual(const PvArrayModel& m, double a, double r_s)
{
    double i_ph = 0.0;
    double i_0 = 0.0;
    anchor_currents(m, a, r_s, i_ph, i_0);
    const double vd = m.v_mpp + m.i_mpp * r_s;
    const double g = i_0 / a * std::exp(vd / a) + 1.0 / m.r_shunt;
    return -g / (1.0 + r_s * g) + m.i_mpp / m.v_mpp;
}

template <class F>
double bisect(F f, double lo, double hi, int iterations = 200)
{
    double f_lo = f(lo);
    for (int k = 0; k < iterations; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// For a fixed series resistance, the modified ideality voltage that
// reproduces the MPP current; NaN when no such value exists.
double ideality_for(const PvArrayModel& m, double r_s)
{
    const double lo = m.v_oc / 600.0;
    const double hi = m.v_oc;
    auto f = [&](double a) { return mpp_current_residual(m, a, r_s); };
    if ((f(lo) < 0.0) == (f(hi) < 0.0)) {
        return std::nan("");
    }
    return bisect(f, lo, hi);
}

DiodeParams fit(const PvArrayModel& m)
{
    if (!(0.0 < m.v_mpp && m.v_mpp < m.v_oc && 0.0 < m.i_mpp && m.i_mpp < m.i_sc) ||
        !(m.r_shunt > 0.0)) {
        throw std::invalid_argument("PV anchors need 0 < Vmpp < Voc, 0 < Impp < Isc, Rsh > 0");
    }
    // The slope residual decreases with Rs; an Rs with no admissible ideality
    // lies past the root.
    auto g = [&](double r_s) {
        const double a = ideality_for(m, r_s);
        return std::isnan(a) ? -1.0 : mpp_slope_residual(m, a, r_s);
    };
    const double rs_hi = (m.v_oc - m.v_mpp) / m.i_mpp;
    if (g(0.0) < 0.0) {
        throw std::invalid_argument("PV anchors admit no single-diode fit with Rs >= 0");
    }
    const double r_s = bisect(g, 0.0, rs_hi);
    const double a = ideality_for(m, r_s);
    DiodeParams p{0.0, 0.0, a, r_s, m.r_shunt};
    if (std::isnan(a) || !anchor_currents(m, a, r_s, p.i_ph, p.i_0)) {
        throw std::invalid_argument("single-diode fit did not converge");
    }
    return p;
}

} // namespace

PvArray::PvArray(const PvArrayModel& model) : model_(model)
{
    const DiodeParams p = fit(model_);
    i_ph_ = p.i_ph;
    i_0_ = p.i_0;
    a_ = p.a;
    r_s_ = p.r_s;
}

double PvArray::current(double v, double irradiance, double temp_c) const
{
    const double g = std::max(irradiance, 0.0) / 1000.0;
    const double dT = temp_c - 25.0;
    const double a = a_ * (temp_c + 273.15) / kStcKelvin;
    const double i_ph_stc_t = i_ph_ * (1.0 + model_.alpha_isc * dT);
    const double i_ph = i_ph_stc_t * g;
    double i_0 = i_0_;
    if (dT != 0.0) {
        const double v_oc_t = model_.v_oc * (1.0 + model_.beta_voc * dT);
        i_0 = (i_ph_stc_t - v_oc_t / model_.r_shunt) / std::expm1(v_oc_t / a);
    }
    const double r_sh = model_.r_shunt;
    v = std::max(v, 0.0);

    // f(I) = Iph - I0 (exp((V + I Rs)/a) - 1) - (V + I Rs)/Rsh - I is strictly
    // decreasing; safeguarded Newton within a bracket.
    auto f = [&](double i, double& df) {
        const double vd = v + i * r_s_;
        const double e = std::exp(std::min(vd / a, 700.0));
        df = -i_0 * r_s_ / a * e - r_s_ / r_sh - 1.0;
        return i_ph - i_0 * (e - 1.0) - vd / r_sh - i;
    };
    double hi = i_ph + i_0 + 1.0;
    double lo = -1.0;
    for (double d = 0.0; f(lo, d) < 0.0;) {
        lo *= 2.0;
    }
    double i = 0.5 * (lo + hi);
    for (int k = 0; k < 60; ++k) {
        double df = 0.0;
        const double fi = f(i, df);
        if (fi > 0.0) {
            lo = i;
        } else {
            hi = i;
        }
        double next = i - fi / df;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - i) < 1e-10 * (1.0 + std::abs(i))) {
            i = next;
            break;
        }
        i = next;
    }
    return std::max(i, 0.0);
}

double pv_current(double v, double irradiance, double temp_c, const PvArray& array)
{
    return array.current(v, irradiance, temp_c);
}

} // namespace gridpv::plant
