#pragma once

// First return map of a sliding Shilnikov connection.
//
// A point w of the fold segment gamma_r (chart coordinate in [-1, 1]) is
// flown by X back to the switching manifold near the pseudo-saddle-focus p,
// then by the sliding field until it reaches the fold curve again. Branches
// are the connected pieces of the domain, numbered by winding count.

#include <complex>
#include <optional>
#include <vector>

#include "ssc/chebyshev.hpp"
#include "ssc/filippov.hpp"

namespace ssc {

struct ReturnMapOptions {
    IntegratorOptions precise;
    IntegratorOptions scan;
    double t_flight = 100.0;
    double t_sliding = 4000.0;
    double tol_connection = 1e-9;
    int fold_nodes = 64;  // continuation nodes per side of q
    int scan_points = 20000;
    int derivative_samples = 33;
    double safety = 1.05;
    double lambda_tolerance = 0.10;
    double surjectivity_tol = 1e-6;
    int surrogate_nodes = 33;
    int max_periods = 60;

    ReturnMapOptions() {
        precise.rtol = 1e-12;
        precise.atol = 1e-14;
        precise.tol_event = 1e-17;
        precise.record = false;
        scan.rtol = 1e-9;
        scan.atol = 1e-11;
        scan.record = false;
    }
};

struct ShilnikovCertificate {
    Vec3 p;
    Vec3 q;
    double t_q = 0.0;
    double residual = 0.0;
    std::vector<double> backward_times;
    std::vector<double> backward_decay;
    double decay_rate = 0.0;  // fitted exponential rate of backward_decay
    std::complex<double> mu;  // eigenvalue of the sliding field at p with Im > 0
    double lambda_hat = 0.0;
    TangentFrame frame;  // tangent frame at p
};

/// Gradient of the scalar field Fg (three dual passes).
Vec3 lie_gradient(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u);

/// Newton projection onto the fold curve {g = 0, Xg = 0}.
Vec3 project_to_fold(const FilippovSystem& Z, const Vec3& u, int iterations = 8);

ShilnikovCertificate verify_connection(const FilippovSystem& Z, const Vec3& p_seed, const Vec3& q_seed,
                                       const ReturnMapOptions& opt = {});

struct FoldSegment {
    Vec3 q;
    double r = 0.0;
    std::vector<Vec3> nodes;  // ordered by arclength
    std::vector<double> s;    // signed arclength from q

    /// h^{-1}(w): the fold point at chart coordinate w.
    [[nodiscard]] Vec3 point(const FilippovSystem& Z, double w) const;
    /// h(u) for a point near the curve (nearest-segment projection).
    [[nodiscard]] double chart(const Vec3& u) const;
};

FoldSegment build_fold_segment(const FilippovSystem& Z, const Vec3& q, double r, const ReturnMapOptions& opt = {});

/// Everything the return map needs, frozen after construction.
struct ReturnMapContext {
    FilippovSystem Z;
    ShilnikovCertificate cert;
    FoldSegment fold;
    ReturnMapOptions opt;
};

enum class Accuracy { Precise, Scan };

struct FlightResult {
    Vec3 point;
    double time = 0.0;
};

FlightResult theta_X(const ReturnMapContext& ctx, double w, Accuracy acc = Accuracy::Precise);

struct ReturnResult {
    double value;  // chart coordinate of the hit
    double turns;  // revolutions around p along the sliding orbit
    Vec3 start;
    Vec3 hit;
    double time;
};

/// Throws SectionMiss when w is outside the domain of the map.
ReturnResult first_return(const ReturnMapContext& ctx, double w, Accuracy acc = Accuracy::Precise);

enum class Side { L, R };

[[nodiscard]] const char* to_string(Side s);

struct Branch {
    Side side = Side::R;
    int index = 0;
    int winding = 0;  // c_J = index - 1
    double lo = 0.0;  // chart interval
    double hi = 0.0;
    double deriv_lo = 0.0;  // lower bound on |psi'|
    double deriv_hi = 0.0;  // upper bound on |psi'|
    bool increasing = true;
    double image_lo = 0.0;  // pi at lo and hi
    double image_hi = 0.0;
    double turns = 0.0;  // measured at the midpoint
    Chebyshev surrogate;  // pi on [lo, hi]
    double surrogate_error = 0.0;

    [[nodiscard]] double width() const { return hi - lo; }
    [[nodiscard]] bool surjective(double tol) const {
        return std::min(image_lo, image_hi) <= -1.0 + tol && std::max(image_lo, image_hi) >= 1.0 - tol;
    }
};

struct BranchScan {
    std::vector<Branch> branches;  // indices 1..i_max on both sides, L first
    std::size_t evaluations = 0;
};

/// Default truncation from the noise floor of the connection.
int default_imax(double lambda, double r, double residual, int cap = 14);

BranchScan enumerate_branches(const ReturnMapContext& ctx, int i_max);

/// Exact inverse of pi on J by safeguarded secant iteration.
double branch_inverse(const ReturnMapContext& ctx, const Branch& J, double x);

/// Inverse of the branch surrogate; derivative through the inverse function rule.
double surrogate_inverse(const Branch& J, double x, double* derivative = nullptr);

/// A = min_J 1 / (c_J^max * lambda^{c_J}).
double estimate_A(const std::vector<Branch>& branches, double lambda);

int select_U(const std::vector<Branch>& branches, double lambda, double A, double surjectivity_tol = 1e-6);

/// Geometric mean of consecutive width ratios (larger index over smaller),
/// inverted, over branches with index in [i_from, i_to].
double lambda_from_branches(const std::vector<Branch>& branches, int i_from, int i_to);

/// Throws LambdaMismatch when the estimates differ by more than `tolerance` relative.
void cross_validate_lambda(double eigen, double decay, double tolerance);

/// One-call construction: certificate, fold segment, context.
ReturnMapContext make_return_map(const FilippovSystem& Z, const Vec3& p_seed, const Vec3& q_seed, double r,
                                 const ReturnMapOptions& opt = {});

}  // namespace ssc
