#pragma once

// Full dimension pipeline on a Filippov system with a sliding Shilnikov
// connection: certificate, branches, cutoff, CIFS, dimension bounds, covers
// and the oracle cross-check.

#include <functional>
#include <string>
#include <vector>

#include "ssc/cifs.hpp"
#include "ssc/oracle.hpp"
#include "ssc/returnmap.hpp"

namespace ssc {

struct PipelineOptions {
    double r = 0.05;
    int i_max = 0;         // 0 selects default_imax
    int cover_depth = 6;   // Cantor certificate
    int decay_depth = 8;   // cover length decay
    std::vector<int> schedule;  // empty: every prefix size
    BoxCountOptions box;
    double sample_resolution = 0.0;  // 0: box.window_lo / 3
    std::size_t budget = kDefaultBudget;
    ReturnMapOptions returnmap;
};

struct PipelineResult {
    ReturnMapContext ctx;
    BranchScan scan;
    int i_max = 0;
    double lambda_decay = 0.0;     // from the backward decay of q
    double lambda_branches = 0.0;  // from consecutive branch widths
    double A = 0.0;
    int i_min = 0;
    IfsSystem system;  // branches with index >= i_min, with tail
    ConditionReport conditions;
    DimensionReport dimension;
    PositiveWitness positive;
    IfsSystem cantor_system;
    CoverSequence cantor_covers;
    Scaffold scaffold;
    CantorCertificate cantor;
    IfsSystem decay_system;
    CoverSequence decay_covers;
    PointSample sample;
    BoxCountResult box;
    Verdict verdict;
};

/// A ContractionMap for psi_J (surrogate inverse of pi on J).
ContractionMap branch_map(const Branch& J);

IfsSystem branch_system(const std::vector<Branch>& branches, int i_min, const TailModel& tail);

/// pi as a plain function; NaN outside its domain.
std::function<double(double)> forward_map(const ReturnMapContext& ctx);

/// Errors from each stage are rethrown with the stage name in front.
PipelineResult run_pipeline(const FilippovSystem& Z, const Vec3& p_seed, const Vec3& q_seed,
                            const PipelineOptions& opt = {});

/// Oracle and certificate stages for an analytic system (no return map).
struct FixtureResult {
    DimensionReport dimension;
    ConditionReport conditions;
    IfsSystem cover_system;
    CoverSequence covers;
    Scaffold scaffold;
    CantorCertificate cantor;
    PointSample sample;
    BoxCountResult box;
    Verdict verdict;
};

FixtureResult run_fixture(const IfsSystem& sys, int depth, const std::vector<int>& schedule = {},
                          const BoxCountOptions& box = {}, std::size_t budget = kDefaultBudget);

}  // namespace ssc
