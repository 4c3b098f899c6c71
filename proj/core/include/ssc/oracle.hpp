#pragma once

// Brute-force cross-checks for the cifs module: box counting on attractor
// samples and cover lengths.

#include <cstddef>
#include <string>
#include <vector>

#include "ssc/cifs.hpp"

namespace ssc {

enum class Provenance { CoverMidpoints, WordImages, OrbitSample };

[[nodiscard]] const char* to_string(Provenance p);

struct PointSample {
    std::vector<double> points;  // sorted, deduplicated at 1e-14
    Provenance provenance = Provenance::OrbitSample;
    int depth = 0;  // cover level or longest word
    bool overflow = false;
};

/// Sorts and deduplicates.
PointSample make_sample(std::vector<double> points, Provenance provenance, int depth = 0);

PointSample sample_cover_midpoints(const CoverSet& cover);

/// Midpoints of psi_w(K) over the words w whose image is shorter than
/// `resolution` (relative to |K|) while its parent word's image is not.
/// Stops early with a partial sample (overflow set) at `budget` points.
PointSample sample_word_images(const IfsSystem& sys, double resolution, std::size_t budget = 4 * kDefaultBudget);

struct BoxCountOptions {
    double window_lo = 1e-6;  // box sizes relative to the sample diameter
    double window_hi = 1e-2;
    int per_decade = 4;
    double min_r2 = 0.99;
};

struct BoxCountResult {
    double slope = 0.0;
    double r2 = 1.0;
    std::vector<double> eps;             // absolute box sizes, decreasing
    std::vector<std::size_t> counts;     // occupied boxes per size
};

/// Boxes are anchored at the smallest sample point. Throws DegenerateFit when
/// R^2 falls below `min_r2` or the sample is too small to fit.
BoxCountResult box_counting(const PointSample& sample, const BoxCountOptions& opt = {});

double cover_length(const CoverSet& cover);

struct Verdict {
    bool passed = false;
    double box_slope = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    double margin_lo = 0.0;  // box_slope - band_lo
    double margin_hi = 0.0;  // band_hi - box_slope
    double sum_c = 0.0;
    double max_decay = 0.0;  // largest ratio of consecutive cover lengths
    std::vector<std::string> failures;
};

/// Box slope inside [moran_lower - band, moran_upper + band], and every
/// consecutive cover length ratio at most sum c_i of `cover_sys` (< 1).
Verdict crosscheck(const DimensionReport& report, const BoxCountResult& box, const CoverSequence& covers,
                   const IfsSystem& cover_sys, double band = 0.03);

}  // namespace ssc
