#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gridpv/cli.hpp"

using namespace gridpv;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& leaf)
{
    const fs::path p = fs::temp_directory_path() / ("gridpv_cli_test_" + leaf);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path tiny_scenario(const fs::path& dir)
{
    const fs::path f = dir / "tiny.yaml";
    std::ofstream(f) << "name: tiny\nduration: 0.12\nwindows:\n  w: [0.02, 0.12]\n";
    return f;
}

const std::string kBad = std::string(GRIDPV_SOURCE_DIR) + "/tests/data/bad_negative_duration.yaml";

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("validate accepts shipped scenarios and rejects a broken one")
    {
        const Invocation ok =
            invoke({"validate", std::string(GRIDPV_SCENARIO_DIR) + "/sag1ph_50_50hz.yaml"});
        CHECK(ok.code == kExitOk);
        CHECK(ok.out.find("ok:") == 0);

        const Invocation bad = invoke({"validate", kBad});
        CHECK(bad.code == kExitConfigError);
        CHECK(bad.err.find("line 3") != std::string::npos);
        CHECK(bad.err.find("duration") != std::string::npos);

        CHECK(invoke({"validate", "/nonexistent.yaml"}).code == kExitConfigError);
    }

    TEST_CASE("usage errors are config errors")
    {
        CHECK(invoke({}).code == kExitConfigError);
        CHECK(invoke({"frobnicate"}).code == kExitConfigError);
        CHECK(invoke({"run"}).code == kExitConfigError);
        CHECK(invoke({"--help"}).code == kExitOk);
    }

    TEST_CASE("run writes time series and metrics")
    {
        const fs::path dir = scratch("run");
        const Invocation r = invoke({"run", tiny_scenario(dir).string(), "--out",
                                     (dir / "out").string(), "--decimate", "16"});
        CHECK(r.code == kExitOk);
        CHECK(fs::exists(dir / "out" / "tiny.csv"));
        REQUIRE(fs::exists(dir / "out" / "tiny.metrics"));
        std::ifstream m(dir / "out" / "tiny.metrics");
        const std::string text((std::istreambuf_iterator<char>(m)), {});
        CHECK(text.find("status = ok") != std::string::npos);
        CHECK(text.find("window.w.p_mean") != std::string::npos);

        CHECK(invoke({"run", kBad, "--out", (dir / "out").string()}).code == kExitConfigError);
        fs::remove_all(dir);
    }

    TEST_CASE("run reports a failed scenario")
    {
        const fs::path dir = scratch("fail");
        const fs::path f = dir / "drop.yaml";
        std::ofstream(f) << "name: drop\nduration: 0.1\n"
                            "grid:\n  sags: [{start: 0.02, end: 1.0, scale: [0.3, 0.3, 0.3]}]\n"
                            "lvrt:\n  profile: [[0, 0], [0.05, 0.9]]\n";
        const Invocation r = invoke({"run", f.string(), "--out", dir.string()});
        CHECK(r.code == kExitScenarioFailed);
        CHECK(r.out.find("FAILED") != std::string::npos);
        fs::remove_all(dir);
    }

    TEST_CASE("sweep runs the cartesian product")
    {
        const fs::path dir = scratch("sweep");
        const Invocation r =
            invoke({"sweep", tiny_scenario(dir).string(), "--param", "grid.freq=50,60", "--out",
                    (dir / "out").string(), "--jobs", "2"});
        CHECK(r.code == kExitOk);
        CHECK(fs::exists(dir / "out" / "tiny__grid.freq=50.csv"));
        CHECK(fs::exists(dir / "out" / "tiny__grid.freq=60.metrics"));

        const Invocation bad = invoke({"sweep", tiny_scenario(dir).string(), "--param",
                                       "grid.freq=50,-1", "--out", (dir / "out").string()});
        CHECK(bad.code == kExitConfigError);
        CHECK(bad.err.find("grid.freq=-1") != std::string::npos);
        CHECK(invoke({"sweep", tiny_scenario(dir).string(), "--param", "nonsense"}).code ==
              kExitConfigError);
        fs::remove_all(dir);
    }
}
