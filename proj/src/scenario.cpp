#include "gridpv/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "gridpv/errors.hpp"

namespace gridpv {

double Scenario::irradiance_at(double t) const
{
    double g = irradiance.empty() ? 1000.0 : irradiance.front().value;
    for (const auto& s : irradiance) {
        if (s.time > t) {
            break;
        }
        g = s.value;
    }
    return g;
}

namespace {

int line_of(const YAML::Node& n)
{
    const int l = n.Mark().line;
    return l >= 0 ? l + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& what)
{
    throw ConfigError(what, line_of(n));
}

// Map section that remembers which keys were read, so leftovers can be
// reported as typos.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            fail(node_, "'" + path_ + "' must be a mapping");
        }
    }

    YAML::Node child(const std::string& key)
    {
        seen_.insert(key);
        if (!node_ || node_.IsNull()) {
            return YAML::Node();
        }
        const YAML::Node& cn = node_;
        return cn[key];
    }

    template <class T>
    bool get(const std::string& key, T& out)
    {
        const YAML::Node n = child(key);
        if (!n || n.IsNull()) {
            return false;
        }
        if (!n.IsScalar()) {
            fail(n, "'" + where(key) + "' must be a scalar");
        }
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, "'" + where(key) + "' has the wrong type (got '" + n.Scalar() + "')");
        }
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(out)) {
                fail(n, "'" + where(key) + "' must be finite");
            }
        }
        return true;
    }

    // Reads a number and checks lo <= value (or lo < value) and value <= hi.
    void number(const std::string& key, double& out, double lo, bool lo_open,
                double hi = INFINITY)
    {
        if (!get(key, out)) {
            return;
        }
        const bool ok = (lo_open ? out > lo : out >= lo) && out <= hi;
        if (!ok) {
            std::ostringstream msg;
            msg << "'" << where(key) << "' = " << out << " out of range ";
            msg << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
            fail(child(key), msg.str());
        }
    }

    void integer(const std::string& key, int& out, int lo)
    {
        if (get(key, out) && out < lo) {
            fail(child(key), "'" + where(key) + "' must be >= " + std::to_string(lo));
        }
    }

    void finish() const
    {
        if (!node_ || node_.IsNull()) {
            return;
        }
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) {
                fail(kv.first, "unknown key '" + where(key) + "'");
            }
        }
    }

    std::string where(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

void require_sequence(const YAML::Node& n, const std::string& what)
{
    if (!n.IsSequence()) {
        fail(n, "'" + what + "' must be a list");
    }
}

std::vector<int> int_list(const YAML::Node& n, const std::string& what, int lo)
{
    require_sequence(n, what);
    std::vector<int> out;
    for (const auto& e : n) {
        int v = 0;
        try {
            v = e.as<int>();
        } catch (const YAML::Exception&) {
            fail(e, "'" + what + "' entries must be integers");
        }
        if (v < lo) {
            fail(e, "'" + what + "' entries must be >= " + std::to_string(lo));
        }
        out.push_back(v);
    }
    return out;
}

double list_number(const YAML::Node& e, const std::string& what)
{
    try {
        const double v = e.as<double>();
        if (std::isfinite(v)) {
            return v;
        }
    } catch (const YAML::Exception&) {
    }
    fail(e, "'" + what + "' entries must be finite numbers");
}

void read_grid(Section& root, Scenario& sc)
{
    Section g(root.child("grid"), "grid");
    auto& gs = sc.grid;
    g.number("u_nom", gs.u_gnom, 0.0, true);
    g.number("freq", gs.freq, 0.0, true);
    g.number("thevenin_r", gs.thevenin_r, 0.0, false);
    g.number("thevenin_l", gs.thevenin_l, 0.0, false);

    if (const auto sags = g.child("sags"); sags && !sags.IsNull()) {
        require_sequence(sags, "grid.sags");
        for (const auto& s : sags) {
            Section ss(s, "grid.sags[]");
            plant::SagEvent ev;
            ss.number("start", ev.t_start, 0.0, false);
            ss.number("end", ev.t_end, 0.0, false);
            if (const auto scale = ss.child("scale"); scale && !scale.IsNull()) {
                require_sequence(scale, "grid.sags[].scale");
                if (scale.size() != 3) {
                    fail(scale, "'grid.sags[].scale' needs three per-phase factors [r, s, t]");
                }
                double f[3];
                for (std::size_t k = 0; k < 3; ++k) {
                    f[k] = list_number(scale[k], "grid.sags[].scale");
                    if (f[k] < 0.0 || f[k] > 1.0) {
                        fail(scale[k], "sag scale factors must lie in [0, 1]");
                    }
                }
                ev.per_phase_scale = {f[0], f[1], f[2]};
            }
            if (!(ev.t_start < ev.t_end)) {
                fail(s, "sag needs start < end");
            }
            ss.finish();
            gs.sags.push_back(ev);
        }
    }
    if (const auto hs = g.child("harmonics"); hs && !hs.IsNull()) {
        require_sequence(hs, "grid.harmonics");
        for (const auto& h : hs) {
            Section hh(h, "grid.harmonics[]");
            plant::HarmonicComponent c;
            hh.integer("order", c.order, 2);
            hh.number("fraction", c.fraction, 0.0, false);
            hh.finish();
            gs.harmonics.push_back(c);
        }
    }
    if (const auto fs = g.child("freq_events"); fs && !fs.IsNull()) {
        require_sequence(fs, "grid.freq_events");
        for (const auto& f : fs) {
            Section ff(f, "grid.freq_events[]");
            plant::FreqEvent ev;
            ff.number("time", ev.time, 0.0, false);
            ff.number("freq", ev.freq, 0.0, true);
            ff.finish();
            gs.freq_events.push_back(ev);
        }
        std::stable_sort(gs.freq_events.begin(), gs.freq_events.end(),
                         [](const auto& a, const auto& b) { return a.time < b.time; });
    }
    g.finish();
}

void read_pv(Section& root, Scenario& sc)
{
    const YAML::Node node = root.child("pv");
    Section p(node, "pv");
    auto& m = sc.pv;
    p.number("v_oc", m.v_oc, 0.0, true);
    p.number("i_sc", m.i_sc, 0.0, true);
    p.number("v_mpp", m.v_mpp, 0.0, true);
    p.number("i_mpp", m.i_mpp, 0.0, true);
    p.integer("series_modules", m.series_modules, 1);
    p.integer("strings", m.strings, 1);
    p.number("r_shunt", m.r_shunt, 0.0, true);
    p.get("alpha_isc", m.alpha_isc);
    p.get("beta_voc", m.beta_voc);
    p.finish();
    try {
        plant::PvArray probe(m);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("pv: ") + e.what(), line_of(node));
    }
}

void read_control(Section& root, Scenario& sc)
{
    Section c(root.child("control"), "control");
    auto& cc = sc.control;
    {
        Section cur(c.child("current"), "control.current");
        cur.number("kp", cc.current.kp, 0.0, false);
        cur.number("ki", cc.current.ki, 0.0, true);
        cur.number("wc", cc.current.wc, 0.0, true);
        cur.get("hc_enabled", cc.current.hc_enabled);
        if (const auto hs = cur.child("hc_harmonics"); hs && !hs.IsNull()) {
            cc.current.hc_harmonics = int_list(hs, "control.current.hc_harmonics", 2);
        }
        cur.number("ki_hc", cc.current.ki_hc, 0.0, true);
        cur.number("m_max", cc.m_max, 0.0, true);
        cur.finish();
    }
    {
        Section dc(c.child("dc_link"), "control.dc_link");
        dc.number("kp", cc.vdc_kp, 0.0, false);
        dc.number("ki", cc.vdc_ki, 0.0, false);
        dc.finish();
    }
    {
        Section sy(c.child("sync"), "control.sync");
        if (const auto hs = sy.child("harmonics"); hs && !hs.IsNull()) {
            cc.sync.harmonics = int_list(hs, "control.sync.harmonics", 1);
            if (std::find(cc.sync.harmonics.begin(), cc.sync.harmonics.end(), 1) ==
                cc.sync.harmonics.end()) {
                fail(hs, "'control.sync.harmonics' must contain the fundamental (1)");
            }
            std::set<int> uniq(cc.sync.harmonics.begin(), cc.sync.harmonics.end());
            if (uniq.size() != cc.sync.harmonics.size()) {
                fail(hs, "'control.sync.harmonics' has duplicates");
            }
        }
        sy.number("sogi_gain", cc.sync.sogi_gain, 0.0, true);
        sy.number("fll_gamma", cc.sync.fll.gamma, 0.0, false);
        double w = 0.0;
        if (sy.get("omega_init", w)) {
            if (!(w > 0.0)) {
                fail(sy.child("omega_init"), "'control.sync.omega_init' must be > 0");
            }
            cc.omega_init = w;
        }
        sy.integer("debounce", cc.sync.debounce_samples, 1);
        sy.finish();
    }
    c.finish();
}

void read_lvrt(Section& root, Scenario& sc)
{
    Section l(root.child("lvrt"), "lvrt");
    l.number("s_nom", sc.lvrt.s_nom, 0.0, true);
    if (const auto prof = l.child("profile"); prof && !prof.IsNull()) {
        require_sequence(prof, "lvrt.profile");
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : prof) {
            if (!p.IsSequence() || p.size() != 2) {
                fail(p, "'lvrt.profile' entries are [time_since_fault, min_v_fault]");
            }
            pts.emplace_back(list_number(p[0], "lvrt.profile"), list_number(p[1], "lvrt.profile"));
        }
        try {
            sc.lvrt.profile = lvrt::RideThroughProfile(std::move(pts));
        } catch (const std::invalid_argument& e) {
            fail(prof, std::string("lvrt.profile: ") + e.what());
        }
    }
    {
        Section m(l.child("mppt"), "lvrt.mppt");
        m.number("step", sc.lvrt_tuning.mppt_step, 0.0, true);
        m.number("period", sc.lvrt_tuning.mppt_period, 0.0, true);
        m.number("v_min", sc.lvrt_tuning.v_min, 0.0, true);
        m.number("track_window", sc.lvrt_tuning.track_window, 0.0, false);
        m.finish();
    }
    {
        Section n(l.child("non_mppt"), "lvrt.non_mppt");
        n.number("gain", sc.lvrt_tuning.non_mppt.gain, 0.0, false);
        n.number("slew", sc.lvrt_tuning.non_mppt.slew, 0.0, true);
        n.finish();
    }
    l.number("power_filter_tau", sc.lvrt_tuning.power_filter_tau, 0.0, true);
    l.finish();
}

} // namespace

Scenario scenario_from_yaml(const YAML::Node& doc)
{
    if (!doc.IsMap()) {
        fail(doc, "scenario document must be a mapping");
    }
    Scenario sc;
    Section root(doc, "");
    root.get("name", sc.name);
    root.number("duration", sc.duration, 0.0, true);
    root.get("temperature", sc.temperature);
    {
        Section t(root.child("timing"), "timing");
        t.number("plant_step", sc.plant_step, 0.0, true, 1e-3);
        t.integer("controller_ratio", sc.controller_ratio, 1);
        t.finish();
    }
    read_grid(root, sc);
    read_pv(root, sc);
    {
        Section p(root.child("plant"), "plant");
        p.number("c_link", sc.plant.c_link, 0.0, true);
        p.number("l_filter", sc.plant.l_filter, 0.0, true);
        p.number("r_filter", sc.plant.r_filter, 0.0, false);
        p.number("v_dc_limit", sc.plant.v_dc_limit, 0.0, true);
        p.number("i_limit", sc.plant.i_limit, 0.0, true);
        p.finish();
    }
    if (const auto irr = root.child("irradiance"); irr && !irr.IsNull()) {
        require_sequence(irr, "irradiance");
        sc.irradiance.clear();
        for (const auto& e : irr) {
            Section s(e, "irradiance[]");
            IrradianceStep step;
            s.number("time", step.time, 0.0, false);
            s.number("value", step.value, 0.0, false, 2000.0);
            s.finish();
            if (!sc.irradiance.empty() && step.time < sc.irradiance.back().time) {
                fail(e, "irradiance steps must be in time order");
            }
            sc.irradiance.push_back(step);
        }
        if (sc.irradiance.empty()) {
            fail(irr, "'irradiance' needs at least one step");
        }
    }
    read_control(root, sc);
    read_lvrt(root, sc);
    {
        Section o(root.child("output"), "output");
        o.integer("decimation", sc.decimation, 1);
        o.finish();
    }
    if (const auto ws = root.child("windows"); ws && !ws.IsNull()) {
        if (!ws.IsMap()) {
            fail(ws, "'windows' maps a name to [t_start, t_end]");
        }
        for (const auto& kv : ws) {
            const auto& v = kv.second;
            if (!v.IsSequence() || v.size() != 2) {
                fail(v, "window '" + kv.first.as<std::string>() + "' must be [t_start, t_end]");
            }
            Window w{kv.first.as<std::string>(), list_number(v[0], "windows"),
                     list_number(v[1], "windows")};
            if (!(0.0 <= w.t_start && w.t_start < w.t_end && w.t_end <= sc.duration + 1e-12)) {
                fail(v, "window '" + w.name + "' must satisfy 0 <= t_start < t_end <= duration");
            }
            sc.windows.push_back(w);
        }
    }
    {
        Section e(root.child("expect"), "expect");
        e.get("disconnect", sc.expect_disconnect);
        e.finish();
    }
    root.finish();

    sc.control.sync.u_gnom_rms = sc.grid.u_gnom;
    sc.lvrt.u_gnom_rms = sc.grid.u_gnom;
    return sc;
}

namespace {

YAML::Node parse_document(const std::string& text)
{
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
    }
}

} // namespace

Scenario parse_scenario(const std::string& text)
{
    return scenario_from_yaml(parse_document(text));
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void set_yaml_path(YAML::Node& root, const std::string& dotted_key, const std::string& value)
{
    if (dotted_key.empty()) {
        throw ConfigError("empty parameter key");
    }
    std::vector<std::string> parts;
    std::stringstream ss(dotted_key);
    for (std::string p; std::getline(ss, p, '.');) {
        if (p.empty()) {
            throw ConfigError("malformed parameter key '" + dotted_key + "'");
        }
        parts.push_back(p);
    }
    // yaml-cpp nodes are handles; reassigning a local would rebind rather
    // than descend, hence the recursion.
    auto descend = [&](auto&& self, YAML::Node node, std::size_t k) -> void {
        if (k + 1 == parts.size()) {
            node[parts[k]] = parse_document(value);
            return;
        }
        if (!node[parts[k]] || !node[parts[k]].IsMap()) {
            node[parts[k]] = YAML::Node(YAML::NodeType::Map);
        }
        self(self, node[parts[k]], k + 1);
    };
    descend(descend, root, 0);
}

} // namespace gridpv
