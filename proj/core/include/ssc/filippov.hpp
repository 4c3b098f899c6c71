#pragma once

// Filippov systems Z = (X, Y)_g on R^3: X acts where g > 0, Y where g < 0.

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "ssc/expr.hpp"
#include "ssc/integrator.hpp"
#include "ssc/vec3.hpp"

namespace ssc {

struct Tolerances {
    double manifold = 1e-10;
    double tangency = 1e-9;
    double regular = 1e-8;
    double event = 1e-12;
    double hyperbolic = 1e-9;
};

struct VectorFieldExpr {
    std::array<Expr, 3> components;
    ParamMap params;

    [[nodiscard]] Vec3 operator()(const Vec3& u) const {
        return {components[0](u), components[1](u), components[2](u)};
    }
};

/// Parse three component expressions. Syntax errors carry the byte offset
/// within the failing component.
VectorFieldExpr parse_field(const std::array<std::string, 3>& text, const ParamMap& params = {});

struct SwitchingFunction {
    Expr expr;
    std::array<Expr, 3> gradient;  // symbolic partials of expr

    [[nodiscard]] double operator()(const Vec3& u) const { return expr(u); }
    [[nodiscard]] Vec3 grad(const Vec3& u) const { return {gradient[0](u), gradient[1](u), gradient[2](u)}; }
};

SwitchingFunction make_switching(Expr g);
SwitchingFunction parse_switching(std::string_view text, const ParamMap& params = {});

struct FilippovSystem {
    VectorFieldExpr X;
    VectorFieldExpr Y;
    SwitchingFunction g;
    Box domain;
    Tolerances tol;
};

/// <F, grad g> at u, from one dual pass of g along F(u).
double lie_derivative(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u);

/// F(Fg) at u: one dual pass of the scalar field Fg along F(u).
double second_lie_derivative(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u);

enum class Region { Crossing, Sliding, Escaping, TangencyX, TangencyY, TangencyBoth };

[[nodiscard]] const char* to_string(Region r);

struct RegionInfo {
    Region label;
    double Xg;
    double Yg;
};

/// Pure sign classification of two Lie derivatives.
Region classify_signs(double Xg, double Yg, double tol_tangency);

RegionInfo classify_region(const FilippovSystem& Z, const Vec3& u);

Vec3 sliding_field(const FilippovSystem& Z, const Vec3& u);

enum class FoldKind { VisibleFoldX, InvisibleFoldX, VisibleFoldY, InvisibleFoldY };
enum class FoldSide { SlidingBoundary, EscapingBoundary, None };

struct FoldInfo {
    FoldKind kind;
    bool fold_regular;  // the other field is transverse
    FoldSide side;
    double first;   // Fg of the tangent field
    double second;  // F^2 g of the tangent field
    double other;   // Lie derivative of the other field
};

/// Fold type at a tangency point. When both fields are tangent the X fold
/// is reported with fold_regular = false.
FoldInfo classify_tangency(const FilippovSystem& Z, const Vec3& u);

/// Newton projection of u onto g = 0 along grad g.
Vec3 project_to_manifold(const SwitchingFunction& g, const Vec3& u, int iterations = 3);

enum class PseudoKind { PseudoSaddleFocus, StablePseudoFocus, PseudoNode, PseudoSaddle };

[[nodiscard]] const char* to_string(PseudoKind k);

struct PseudoEquilibrium {
    Vec3 point;
    Region region;
    std::complex<double> mu1;
    std::complex<double> mu2;
    PseudoKind kind;
    double residual;
    std::array<double, 4> jacobian;  // row-major 2x2 in the tangent frame at point
    TangentFrame frame;
};

struct NewtonOptions {
    int max_iter = 60;
    double tol = 1e-11;
    double fd_step = 1e-6;
};

PseudoEquilibrium find_pseudo_equilibrium(const FilippovSystem& Z, const Vec3& seed, const NewtonOptions& opt = {});

enum class FlowMode { FlowX, FlowY, FlowSliding };
enum class Terminal { ManifoldHit, FoldHit, SectionHit, TimeOut, DomainExit };

[[nodiscard]] const char* to_string(FlowMode m);
[[nodiscard]] const char* to_string(Terminal t);

struct TrajectorySegment {
    FlowMode mode = FlowMode::FlowX;
    std::vector<double> t;  // elapsed time along the integration direction
    std::vector<Vec3> u;
    Terminal terminal = Terminal::TimeOut;
    bool backward = false;

    [[nodiscard]] const Vec3& end() const { return u.back(); }
    [[nodiscard]] double duration() const { return t.back() - t.front(); }
};

/// Flow F from u0 until g changes sign (the root at t = 0 is excluded).
TrajectorySegment flow_to_manifold(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u0, double t_max,
                                   const IntegratorOptions& opt, const Box& domain = {});

struct SlidingStop {
    enum class Kind { FoldBoundary, Section, Time };
    Kind kind = Kind::FoldBoundary;
    double t_max = 1e3;  // always acts as a time-out
    ScalarFn section;    // Kind::Section
};

enum class Direction { Forward, Backward };

/// Sliding flow of Z~ with per-step projection onto M. Starts must lie in
/// the sliding or escaping region.
TrajectorySegment flow_sliding(const FilippovSystem& Z, const Vec3& w0, const SlidingStop& stop,
                               Direction dir, const IntegratorOptions& opt);

enum class EscapingPolicy { Error, FollowX, FollowY, FollowSliding };

std::vector<TrajectorySegment> filippov_trajectory(const FilippovSystem& Z, const Vec3& u0, double T,
                                                   EscapingPolicy policy, const IntegratorOptions& opt);

}  // namespace ssc
