#pragma once

// Scenario description and its YAML loader.

#include <optional>
#include <string>
#include <vector>

#include "gridpv/lvrt.hpp"
#include "gridpv/plant.hpp"
#include "gridpv/regulators.hpp"
#include "gridpv/sync.hpp"

namespace YAML {
class Node;
}

namespace gridpv {

struct IrradianceStep {
    double time = 0.0;
    double value = 1000.0; ///< W/m^2, held from `time` on
};

/// Named analysis window, [t_start, t_end).
struct Window {
    std::string name;
    double t_start = 0.0;
    double t_end = 0.0;
};

struct ControlConfig {
    regulators::PrHcConfig current{};
    double m_max = 1.0;
    double vdc_kp = 3977.5;
    double vdc_ki = 152110.0;
    sync::MsogiConfig sync{};
    std::optional<double> omega_init; ///< rad/s; defaults to the nominal grid frequency
};

struct Scenario {
    std::string name = "scenario";
    double duration = 2.0;
    double plant_step = 5.1196e-6;
    int controller_ratio = 8;
    double temperature = 25.0;

    plant::GridSpec grid{};
    plant::PvArrayModel pv{};
    plant::PlantParams plant{};
    std::vector<IrradianceStep> irradiance{{0.0, 1000.0}};

    ControlConfig control{};
    lvrt::SupervisorConfig lvrt{};
    lvrt::SupervisorTuning lvrt_tuning{};

    int decimation = 8;
    std::vector<Window> windows;
    bool expect_disconnect = false;

    double controller_step() const { return plant_step * controller_ratio; }
    double irradiance_at(double t) const;
};

/// Builds a scenario from a parsed document, applying defaults for absent
/// keys. Unknown keys and out-of-range values raise ConfigError with the
/// offending line.
Scenario scenario_from_yaml(const YAML::Node& root);

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

/// Overrides the value at a dotted path (e.g. "grid.freq") in a document,
/// creating intermediate maps as needed. The value text is parsed as YAML.
void set_yaml_path(YAML::Node& root, const std::string& dotted_key, const std::string& value);

} // namespace gridpv
