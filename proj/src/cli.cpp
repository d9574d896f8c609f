#include "gridpv/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "gridpv/engine.hpp"
#include "gridpv/errors.hpp"
#include "gridpv/output.hpp"
#include "gridpv/scenario.hpp"

namespace gridpv {

namespace fs = std::filesystem;

namespace {

struct Variant {
    std::string label; // "" for the unmodified template
    Scenario scenario;
};

struct SweepParam {
    std::string key;
    std::vector<std::string> values;
};

SweepParam parse_param(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw ConfigError("--param expects key=v1,v2,... (got '" + text + "')");
    }
    SweepParam p{text.substr(0, eq), {}};
    std::stringstream ss(text.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');) {
        if (v.empty()) {
            throw ConfigError("--param '" + p.key + "' has an empty value");
        }
        p.values.push_back(v);
    }
    return p;
}

std::string safe_name(std::string s)
{
    for (char& c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ||
              c == '=')) {
            c = '_';
        }
    }
    return s;
}

YAML::Node load_document(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file '" + path + "'");
    }
    try {
        return YAML::Load(in);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
    }
}

// Cartesian product of all parameter values applied to the template.
std::vector<Variant> expand(const std::string& path, const std::vector<SweepParam>& params)
{
    const YAML::Node base = load_document(path);
    std::vector<Variant> out;
    std::vector<std::size_t> idx(params.size(), 0);
    while (true) {
        YAML::Node doc = YAML::Clone(base);
        std::string label;
        for (std::size_t k = 0; k < params.size(); ++k) {
            set_yaml_path(doc, params[k].key, params[k].values[idx[k]]);
            label += (label.empty() ? "" : "__") + params[k].key + "=" + params[k].values[idx[k]];
        }
        Scenario sc;
        try {
            sc = scenario_from_yaml(doc);
        } catch (const ConfigError& e) {
            throw ConfigError("[" + label + "] " + e.what(), e.line());
        }
        out.push_back({label, std::move(sc)});

        std::size_t k = 0;
        for (; k < params.size(); ++k) {
            if (++idx[k] < params[k].values.size()) {
                break;
            }
            idx[k] = 0;
        }
        if (k == params.size()) {
            break;
        }
    }
    return out;
}

struct Written {
    bool failed;
    std::string summary;
};

Written run_and_write(const Scenario& sc, const fs::path& dir, const std::string& stem,
                      int decimation)
{
    const RunResult r = run_scenario(sc);
    fs::create_directories(dir);
    const fs::path csv = dir / (stem + ".csv");
    const fs::path met = dir / (stem + ".metrics");
    write_timeseries_file(csv.string(), r.series, decimation);
    write_metrics_file(met.string(), r);
    std::string s = stem + ": " + (r.failed ? "FAILED (" + r.failure + ")" : "ok") + " -> " +
                    csv.string() + ", " + met.string();
    return {r.failed, s};
}

int cmd_validate(const std::string& path, std::ostream& out)
{
    const Scenario sc = load_scenario(path);
    out << "ok: " << sc.name << " (" << sc.duration << " s, " << sc.windows.size()
        << " windows)\n";
    return kExitOk;
}

int cmd_run(const std::string& path, const std::string& out_dir, int decimate, std::ostream& out)
{
    const Scenario sc = load_scenario(path);
    const Written w = run_and_write(sc, out_dir, safe_name(sc.name),
                                    decimate > 0 ? decimate : sc.decimation);
    out << w.summary << '\n';
    return w.failed ? kExitScenarioFailed : kExitOk;
}

int cmd_sweep(const std::string& path, const std::vector<std::string>& param_text,
              const std::string& out_dir, int decimate, int jobs, std::ostream& out)
{
    std::vector<SweepParam> params;
    for (const auto& t : param_text) {
        params.push_back(parse_param(t));
    }
    // Every variant is validated before any of them runs.
    const std::vector<Variant> variants = expand(path, params);

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t limit = jobs > 0 ? static_cast<std::size_t>(jobs) : hw;
    std::vector<Written> results(variants.size());
    for (std::size_t start = 0; start < variants.size(); start += limit) {
        std::vector<std::future<Written>> batch;
        const std::size_t end = std::min(variants.size(), start + limit);
        for (std::size_t k = start; k < end; ++k) {
            const Variant& v = variants[k];
            const std::string stem =
                safe_name(v.scenario.name + (v.label.empty() ? "" : "__" + v.label));
            const int dec = decimate > 0 ? decimate : v.scenario.decimation;
            batch.push_back(std::async(std::launch::async, run_and_write, std::cref(v.scenario),
                                       fs::path(out_dir), stem, dec));
        }
        for (std::size_t k = start; k < end; ++k) {
            results[k] = batch[k - start].get();
        }
    }
    bool any_failed = false;
    for (const auto& r : results) {
        out << r.summary << '\n';
        any_failed = any_failed || r.failed;
    }
    return any_failed ? kExitScenarioFailed : kExitOk;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-rate simulator of a grid-connected PV inverter with ride-through control"};
    app.require_subcommand(1);

    std::string file;
    std::string out_dir = "out";
    int decimate = 0;
    int jobs = 0;
    std::vector<std::string> params;

    auto* run = app.add_subcommand("run", "simulate a scenario, write time series and metrics");
    run->add_option("scenario", file, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--decimate", decimate, "rows per plant sample (default: scenario value)")
        ->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "run every combination of parameter values");
    sweep->add_option("template", file, "scenario file used as template")->required();
    sweep->add_option("--param", params, "dotted.key=v1,v2,... (repeatable)")->required();
    sweep->add_option("--out", out_dir, "output directory")->capture_default_str();
    sweep->add_option("--decimate", decimate, "rows per plant sample")->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", jobs, "concurrent runs (default: hardware threads)")
        ->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "check a scenario file against the schema");
    validate->add_option("scenario", file, "scenario file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*run) {
            return cmd_run(file, out_dir, decimate, out);
        }
        if (*sweep) {
            return cmd_sweep(file, params, out_dir, decimate, jobs, out);
        }
        return cmd_validate(file, out);
    } catch (const ConfigError& e) {
        err << "config error in " << file << ": " << e.what() << '\n';
        return kExitConfigError;
    } catch (const YAML::Exception& e) {
        err << "config error in " << file << ": " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitScenarioFailed;
    }
}

int cli_main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

} // namespace gridpv
