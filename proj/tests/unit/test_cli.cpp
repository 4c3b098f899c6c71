#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ssc/errors.hpp"
#include "ssc_app/commands.hpp"
#include "ssc_app/config.hpp"

using namespace ssc;
using namespace ssc::app;
namespace fs = std::filesystem;

namespace {

const char* kBench = R"cfg({
  "version": 1,
  "system": {
    "X": ["a*x - b*y + (u1 - nu*x)*tanh(k*z)", "b*x + a*y + (u2 - nu*y)*tanh(k*z)", "x - 1 + w*tanh(k*z)"],
    "Y": ["0", "0", "1"],
    "g": "z",
    "params": {"a": 0.1, "b": 1, "k": 40, "w": 0.9, "nu": 1,
               "u1": 0.030704907601503038, "u2": 0.0097382095355196072},
    "domain": {"lo": [-4, -4, -2], "hi": [4, 4, 2]}
  },
  "connection": {"p_seed": [0.01, 0.01, 0], "q_seed": [1, 0.001, 0]}
})cfg";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ssc_unit_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        out.push_back(cells);
    }
    return out;
}

int run(auto&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return exit_code(e);
    }
}

std::string config_error(const std::string& text) {
    try {
        (void)parse_config(text, "cfg.json");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    FAIL("expected ConfigError");
    return {};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(kBench);
    REQUIRE(cfg.system);
    CHECK(cfg.system->params.at("u1") == 0.030704907601503038);
    CHECK(cfg.q_seed.value()[0] == 1.0);
    CHECK(cfg.r == 0.05);

    CHECK(config_error("{\n  \"version\": 1,\n  \"system\": [\n}").find("cfg.json:4:1") != std::string::npos);
    CHECK(config_error(R"({"version": 2, "model": {}})").find("version") != std::string::npos);
    CHECK(config_error(R"({"model": {}})").find("version: missing") != std::string::npos);
    CHECK(config_error(R"({"version": 1, "model": {}, "extra": 3})").find("extra: unknown key") != std::string::npos);
    CHECK(config_error(R"({"version": 1, "model": {}, "analysis": {"r": -1}})").find("analysis.r") != std::string::npos);
    CHECK(config_error(R"({"version": 1, "model": {}, "tolerances": {"event": 0}})").find("tolerances.event") !=
          std::string::npos);
    CHECK(config_error(R"({"version": 1})").find("system") != std::string::npos);
    CHECK(config_error(R"({"version": 1, "model": {"kind": "sierpinski"}})").find("model.kind") != std::string::npos);
}

TEST_CASE("overrides") {
    RunConfig cfg = parse_config(kBench);
    Overrides o;
    o.radius = 0.025;
    o.i_max = 6;
    o.depth = 3;
    o.tol_event = 1e-11;
    o.policy = "slide";
    apply(cfg, o);
    CHECK(cfg.r == 0.025);
    CHECK(cfg.i_max == 6);
    CHECK(cfg.depth == 3);
    CHECK(cfg.tol_event == 1e-11);
    CHECK(cfg.policy == EscapingPolicy::FollowSliding);
    Overrides bad;
    bad.radius = 0.0;
    CHECK_THROWS_AS(apply(cfg, bad), Error);
}

TEST_CASE("classify") {
    RunConfig cfg = parse_config(kBench);
    cfg.out = scratch("classify");
    REQUIRE(cmd_classify(cfg, {17}) == kExitOk);
    int sliding = 0;
    for (const auto& r : rows(cfg.out / "classify.csv")) {
        const double x = std::stod(r[0]);
        CHECK(r[2] != "escaping");
        if (x < 1.0) {
            CHECK(r[2] == "sliding");
            ++sliding;
        }
        if (x > 1.0) CHECK(r[2] == "crossing");
        if (x == 1.0) CHECK(r[2] == "tangency_x");
        CHECK(std::stod(r[3]) == doctest::Approx(x - 1.0));
        CHECK(std::stod(r[4]) == 1.0);
    }
    CHECK(sliding > 0);

    // flipping Y swaps the regions
    RunConfig flip = cfg;
    flip.system->Y = {"0", "0", "-1"};
    REQUIRE(cmd_classify(flip, {17}) == kExitOk);
    for (const auto& r : rows(cfg.out / "classify.csv"))
        if (std::stod(r[0]) > 1.0) CHECK(r[2] == "escaping");

    RunConfig broken = cfg;
    broken.system->X[0] = "a*x - (b*y";
    CHECK(run([&] { return cmd_classify(broken); }) == kExitConfig);
}

TEST_CASE("simulate") {
    RunConfig cfg = parse_config(kBench);
    cfg.out = scratch("simulate");
    SimulateOptions o;
    o.T = 6.0;
    REQUIRE(cmd_simulate(cfg, o) == kExitOk);
    const auto r = rows(cfg.out / "trajectory.csv");
    REQUIRE_FALSE(r.empty());
    CHECK(r.front()[4] == "X");
    CHECK(r.back()[4] == "SLIDE");
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(std::stod(r[i][0]) >= std::stod(r[i - 1][0]));

    RunConfig esc = cfg;
    esc.system->X = {"0", "0", "1"};
    esc.system->Y = {"0", "0", "-1"};
    o.u0 = Vec3{0.0, 0.0, 0.0};
    CHECK(run([&] { return cmd_simulate(esc, o); }) == kExitDynamics);
    esc.policy = EscapingPolicy::FollowX;
    CHECK(run([&] { return cmd_simulate(esc, o); }) == kExitOk);
}

TEST_CASE("dimension needs both seeds") {
    RunConfig cfg = parse_config(kBench);
    cfg.q_seed.reset();
    cfg.out = scratch("noseed");
    CHECK(run([&] { return cmd_dimension(cfg); }) == kExitConfig);
}

TEST_CASE("model and attractor") {
    RunConfig cfg = parse_config(R"({"version": 1, "model": {"kind": "geometric", "lambda": 4, "a": 1}})");
    cfg.out = scratch("model");
    const DimensionRun d = run_dimension(cfg);
    CHECK(d.passed);
    const auto report = nlohmann::json::parse(d.report);
    CHECK(std::abs(report["dimension"]["pressure_root"].get<double>() - std::log(3.0) / std::log(4.0)) < 1e-10);
    CHECK(report["verdict"] == "PASS");
    CHECK(slurp(cfg.out / "report.json") == d.report);

    RunConfig mt = parse_config(R"({"version": 1, "model": {"kind": "middle-thirds"}})");
    mt.out = scratch("attractor");
    mt.depth = 3;
    CHECK(cmd_attractor(mt) == kExitOk);
    int level3 = 0;
    for (const auto& r : rows(mt.out / "attractor_covers.csv")) {
        if (r[2] != "3") continue;
        ++level3;
        CHECK(std::stod(r[1]) - std::stod(r[0]) == doctest::Approx(1.0 / 27.0));
    }
    CHECK(level3 == 8);
    const auto cert = nlohmann::json::parse(slurp(mt.out / "certificate.json"));
    CHECK(cert["passed"] == true);

    mt.depth = 0;
    CHECK(cmd_attractor(mt) == kExitOk);
    const auto pts = rows(mt.out / "scaffold.csv");
    REQUIRE(pts.size() == 1);
    CHECK(pts[0][0] == "0");

    RunConfig g = parse_config(R"({"version": 1, "model": {"kind": "geometric"}, "analysis": {"depth": 8}})");
    g.out = scratch("geometric");
    CHECK(cmd_attractor(g) == kExitOk);
}

}
