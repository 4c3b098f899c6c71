#pragma once

// Batch commands behind the `ssc` executable. Each writes its files under
// cfg.out and returns the process exit code: 0 success or PASS, 3 FAIL.
// Errors propagate as exceptions; exit_code() maps them to 1 (configuration)
// or 2 (dynamics).

#include <exception>
#include <optional>
#include <string>

#include "ssc/pipeline.hpp"
#include "ssc_app/config.hpp"

namespace ssc::app {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDynamics = 2;
constexpr int kExitFail = 3;

int exit_code(const std::exception& e);

struct ClassifyOptions {
    int grid = 101;
};

struct SimulateOptions {
    std::optional<Vec3> u0;  // defaults to connection.q_seed
    double T = 10.0;
};

int cmd_classify(const RunConfig& cfg, const ClassifyOptions& opt = {});
int cmd_simulate(const RunConfig& cfg, const SimulateOptions& opt = {});
int cmd_return_map(const RunConfig& cfg);

/// Everything `dimension` computed, for callers that want more than the files.
struct DimensionRun {
    std::optional<PipelineResult> pipeline;  // system configs
    std::optional<FixtureResult> fixture;    // model configs
    std::string report;                      // contents of report.json
    bool passed = false;
};

DimensionRun run_dimension(const RunConfig& cfg);
int cmd_dimension(const RunConfig& cfg);
int cmd_attractor(const RunConfig& cfg);

/// `dimension` on the configured analytic model.
int cmd_model(const RunConfig& cfg);

IfsSystem build_model(const ModelConfig& m);
PipelineOptions pipeline_options(const RunConfig& cfg);

}  // namespace ssc::app
