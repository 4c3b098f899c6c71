#pragma once

// SSC-bench: a Filippov system with a sliding Shilnikov connection.
//
//   g = z,  Y = (0, 0, 1),
//   X = (a x - b y + (u1 - nu x) s,  b x + a y + (u2 - nu y) s,  x - 1 + w s),
//   s = tanh(k z).
//
// On z = 0 the sliding field is (a x - b y, b x + a y, 0) / (2 - x), an
// unstable focus at the origin, and the fold line is x = 1. The controls
// (u1, u2) are found by shooting so that the X orbit of q = (1, 0, 0) lands
// on the origin.

#include <array>
#include <string>

#include "ssc/filippov.hpp"

namespace ssc {

struct SscBenchParams {
    double alpha = 0.1;
    double beta = 1.0;
    double kappa = 40.0;
    double w = 0.9;
    double nu = 1.0;
    double u1 = 0.0;
    double u2 = 0.0;
};

struct SscBenchText {
    std::array<std::string, 3> X;
    std::array<std::string, 3> Y;
    std::string g;
    ParamMap params;
};

SscBenchText ssc_bench_text(const SscBenchParams& p);
FilippovSystem make_ssc_bench(const SscBenchParams& p);

struct ShootingResult {
    SscBenchParams params;  // with the solved u1, u2
    double residual;        // |landing point - origin|
    double flight_time;
    int iterations;
};

/// Newton on (u1, u2) with a finite-difference Jacobian, starting from the
/// values in `guess`.
ShootingResult shoot_ssc_bench(const SscBenchParams& guess, double tol = 1e-13, int max_iter = 40);

}  // namespace ssc
