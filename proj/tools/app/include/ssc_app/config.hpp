#pragma once

// Run configuration: one JSON document with "version": 1.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ssc/filippov.hpp"

namespace ssc::app {

struct SystemConfig {
    std::array<std::string, 3> X;
    std::array<std::string, 3> Y;
    std::string g;
    ParamMap params;
    Box domain;
};

/// Analytic fixtures: "geometric", "middle-thirds" or "equal-ratio".
struct ModelConfig {
    std::string kind = "geometric";
    double a = 1.0;
    double lambda = 4.0;
    int i_min = 1;
    int i_max = 40;
    int k = 2;
    double c = 1.0 / 3.0;
    double K_lo = 0.0;  // middle-thirds and equal-ratio
    double K_hi = 1.0;
};

struct RunConfig {
    std::optional<SystemConfig> system;
    std::optional<ModelConfig> model;
    std::optional<Vec3> p_seed;
    std::optional<Vec3> q_seed;

    double r = 0.05;
    int i_max = 0;  // 0: noise-floor default
    int depth = 6;
    int decay_depth = 8;
    std::vector<int> schedule;
    double box_lo = 1e-6;
    double box_hi = 1e-2;

    double tol_event = 1e-12;
    double tol_manifold = 1e-10;
    double tol_tangency = 1e-9;

    std::filesystem::path out = "out";
    std::uint64_t seed = 1;
    EscapingPolicy policy = EscapingPolicy::Error;
};

/// Throws Error(ConfigError) naming the offending field, or with the line
/// and column of a JSON syntax error.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Command line values that override the file.
struct Overrides {
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_event;
    std::optional<double> radius;
    std::optional<int> i_max;
    std::optional<int> depth;
    std::optional<std::string> policy;
};

void apply(RunConfig& cfg, const Overrides& o);

/// Throws ConfigError when no system is configured.
FilippovSystem build_system(const RunConfig& cfg);

EscapingPolicy parse_policy(const std::string& s);

}  // namespace ssc::app
