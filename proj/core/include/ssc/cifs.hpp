#pragma once

// Conformal iterated function systems on an interval K: condition checks,
// Moran and pressure dimension bounds, cover iteration and Cantor-structure
// certificates.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ssc {

struct Interval {
    double lo = -1.0;
    double hi = 1.0;

    [[nodiscard]] double length() const { return hi - lo; }
    [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
    [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }
};

struct ContractionMap {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    Interval image;
    double b = 0.0;  // lower bound on |f'|
    double c = 0.0;  // upper bound on |f'|
    bool increasing = true;
    double noise = 0.0;  // evaluation error of the map, in image-side units
    std::string tag;
    int side = 0;   // -1 for L, +1 for R, 0 when the map is not a branch
    int index = 0;  // branch index i >= 1, 0 when not a branch
};

/// Closed form for the maps beyond the listed prefix of a countable system:
/// two maps per index i > i_max with |f'| <= (A lambda^{i-1})^{-1}.
struct TailModel {
    double A = 1.0;
    double lambda = 2.0;
    int i_max = 0;
};

struct IfsSystem {
    Interval K;
    std::vector<ContractionMap> maps;
    std::optional<TailModel> tail;
};

// fixtures

/// Middle-thirds pair on K (default [0, 1]).
IfsSystem make_middle_thirds(Interval K = {0.0, 1.0});

/// k increasing maps of ratio c spread evenly over K (images may touch when k c = 1).
IfsSystem make_equal_ratio(int k, double c, Interval K = {0.0, 1.0});

/// Affine two-sided model on [-1, 1]: for i_min <= i <= i_max
///   psi_{R,i}(x) = lambda^{-i} (m + a (x + 1)),  psi_{L,i} = -psi_{R,i},
/// with m = lambda^{i_min} - 2a, so |psi'| = a lambda^{-i} and the images
/// accumulate at 0. Carries the exact tail (A = lambda / a).
IfsSystem make_geometric_model(double a, double lambda, int i_min, int i_max);

// conditions

struct ConditionResult {
    std::string id;  // "C1" .. "C6"
    bool passed = false;
    std::string detail;
};

struct ConditionReport {
    std::vector<ConditionResult> conditions;
    double density = 0.5;      // C5 constant for an interval
    double holder_alpha = 1.0;  // C6 surrogate
    double holder_L = 1.0;
    [[nodiscard]] bool passed() const;
};

ConditionReport assess_conditions(const IfsSystem& sys, int samples = 65);

/// Throws ConditionViolated naming the first failing condition and its witness.
ConditionReport check_conditions(const IfsSystem& sys, int samples = 65);

// dimension

struct MoranBounds {
    double s = 0.0;  // sum b_i^s = 1
    double t = 0.0;  // sum c_i^t = 1
};

/// Listed maps only; the tail is ignored.
MoranBounds moran_bounds(const IfsSystem& sys);

/// Root u >= 0 of sum_i r_i^u = 1 (bisection); throws DegenerateSystem when
/// some ratio is not in (0, 1].
double moran_root(const std::vector<double>& ratios);

struct PositiveWitness {
    std::size_t first = 0;
    std::size_t second = 0;
    double b = 0.0;
    double bound = 0.0;  // solution of 2 b^s = 1, clamped to 1
    bool capped = false;
};

PositiveWitness dimension_positive(const IfsSystem& sys);

/// The subsystem of the first n branch indices (both sides) or the first n maps.
IfsSystem truncate(const IfsSystem& sys, int n);

struct TruncationPoint {
    int size = 0;
    double lower = 0.0;
};

std::vector<TruncationPoint> dimension_sup(const IfsSystem& sys, const std::vector<int>& schedule);

/// P(t) = sum c_i^t plus the closed-form tail.
double pressure(const IfsSystem& sys, double t);

/// Root of P = 1 in (0, 1]; throws NoRootInUnitInterval when P(1) >= 1.
double pressure_root(const IfsSystem& sys);

struct DimensionReport {
    double moran_lower = 0.0;
    double moran_upper = 0.0;  // includes the tail when the system has one
    double moran_upper_listed = 0.0;
    std::optional<double> pressure_root;
    std::vector<TruncationPoint> truncation_schedule;
    bool capped = false;
    std::string note;
};

DimensionReport dimension_report(const IfsSystem& sys, const std::vector<int>& schedule);

// covers

/// One level of the attractor cover. Intervals are stored as midpoint and
/// half-length; child j of interval p at the next level has index
/// p * branching + j, and rel_lo / rel_hi give its position inside the
/// parent on a [0, 1] scale (which stays meaningful after the absolute
/// widths fall below double resolution).
struct CoverSet {
    int level = 0;
    std::size_t branching = 0;
    std::vector<double> mid;
    std::vector<double> half;
    std::vector<double> rel_lo;
    std::vector<double> rel_hi;

    [[nodiscard]] std::size_t size() const { return mid.size(); }
    [[nodiscard]] double lo(std::size_t i) const { return mid[i] - half[i]; }
    [[nodiscard]] double hi(std::size_t i) const { return mid[i] + half[i]; }
    [[nodiscard]] double total_length() const;
    /// Index of the interval containing x, widened by `slack`.
    [[nodiscard]] std::optional<std::size_t> find(double x, double slack = 0.0) const;
    /// Distance from x to the nearest interval endpoint.
    [[nodiscard]] double endpoint_distance(double x) const;
};

struct CoverSequence {
    std::vector<CoverSet> levels;  // levels 1..depth
    bool overflow = false;        // stopped early on the interval budget
};

constexpr std::size_t kDefaultBudget = 1'000'000;

/// Levels 1..k of the recursion Delta^{k+1} = union psi_J(Delta^k).
CoverSequence attractor_levels(const IfsSystem& sys, int k, std::size_t budget = kDefaultBudget);

/// The last level reached (level k unless the budget intervened).
CoverSet attractor_iterate(const IfsSystem& sys, int k, std::size_t budget = kDefaultBudget,
                           bool* overflow = nullptr);

/// The largest branch-prefix subsystem whose covers up to `depth` fit the budget.
IfsSystem cover_subsystem(const IfsSystem& sys, int depth, std::size_t budget = kDefaultBudget);

struct ScaffoldPoint {
    double x = 0.0;
    int length = 0;           // word length
    std::uint64_t code = 0;  // index of psi_word(K) in the level-`length` cover
};

struct Scaffold {
    std::vector<ScaffoldPoint> points;
    bool overflow = false;
};

/// Q^0 = {q}, Q^{k+1} = union psi_J(Q^k) together with q.
Scaffold closure_scaffold(const IfsSystem& sys, double q, int k, std::size_t budget = kDefaultBudget);

// forward / backward equivalence

struct ForwardBackwardOptions {
    int samples = 10000;         // decided samples required
    double collar = 1e-8;        // around branch endpoints, along the orbit
    double map_noise = 1e-11;    // evaluation error of the forward map
    double required = 0.999;
    std::uint64_t seed = 1;
    int max_draws = 0;           // 0 means 4 * samples
};

struct ForwardBackwardReport {
    int k = 0;
    int drawn = 0;
    int decided = 0;
    int excluded = 0;
    int agree = 0;
    int inside = 0;  // decided samples inside Delta^{k+1}
    double rate = 0.0;
    bool passed = false;
    std::optional<double> witness;  // first disagreeing sample
};

/// Draws half the samples inside Delta^{k+1} and half inside Delta^j for
/// j = 0..k in turn (length-weighted), and compares cover membership with the
/// explicit forward orbit x, f(x), ..., f^k(x) staying in the images of the
/// maps. `forward` returns NaN outside its domain. A sample is excluded when
/// it lies within the cover error (noise times c of the maps) of a level-(k+1)
/// endpoint, or when its orbit passes within collar + (propagated map_noise)
/// of an image endpoint.
ForwardBackwardReport forward_backward_report(const std::function<double(double)>& forward, const IfsSystem& sys,
                                              int k, const ForwardBackwardOptions& opt = {});

/// As above; throws EquivalenceFailure when the agreement rate is too low.
ForwardBackwardReport verify_forward_backward(const std::function<double(double)>& forward, const IfsSystem& sys,
                                              int k, const ForwardBackwardOptions& opt = {});

// Cantor certificate

struct CantorClause {
    bool passed = false;
    std::string detail;
};

struct CantorCertificate {
    int depth = 0;
    CantorClause length;      // (i)
    CantorClause perfect;     // (ii)
    CantorClause separated;   // (iii)
    CantorClause closure;     // (iv)
    std::vector<double> total_lengths;
    double decay_factor = 0.0;  // geometric mean of consecutive length ratios
    double max_ratio = 0.0;
    double min_gap_ratio = 0.0;  // smallest sibling gap relative to the parent
    std::size_t scaffold_points = 0;
    [[nodiscard]] bool passed() const {
        return length.passed && perfect.passed && separated.passed && closure.passed;
    }
};

/// `sys` generated the covers and the scaffold codes. Clause (iv) tests each
/// scaffold point psi_w(q) as the limit of psi_w(mid J_i) over the branch
/// images J_i of `family` (default: `sys`) accumulating at q, and falls back
/// to the midpoints of the covers nearest to q for systems without branches.
CantorCertificate cantor_assess(const IfsSystem& sys, const CoverSequence& covers, const Scaffold& scaffold,
                                double q = 0.0, const IfsSystem* family = nullptr);

/// Throws CertificateFailure naming the first failing clause.
CantorCertificate cantor_certify(const IfsSystem& sys, const CoverSequence& covers, const Scaffold& scaffold,
                                 double q = 0.0, const IfsSystem* family = nullptr);

/// Image of [mid - half, mid + half] under f: endpoint images when the interval
/// is resolved in absolute coordinates, the mean-value form otherwise.
void map_interval(const ContractionMap& f, double mid, double half, double& out_mid, double& out_half);

/// Maps sorted by the position of their images.
std::vector<std::size_t> image_order(const IfsSystem& sys);

}  // namespace ssc
