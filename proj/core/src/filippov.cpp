#include "ssc/filippov.hpp"

#include <algorithm>
#include <cmath>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

const char* component_name(int i) { return i == 0 ? "x" : i == 1 ? "y" : "z"; }

std::array<Dual, 3> dual_point(const Vec3& u, const Vec3& dir) {
    return {Dual{u[0], dir[0]}, Dual{u[1], dir[1]}, Dual{u[2], dir[2]}};
}

TrajectorySegment to_segment(FlowResult&& r, FlowMode mode) {
    TrajectorySegment seg;
    seg.mode = mode;
    seg.t = std::move(r.t);
    seg.u = std::move(r.u);
    return seg;
}

// Flow without throwing on time-out; used by the trajectory concatenation.
TrajectorySegment flow_field(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u0, double t_max,
                             const IntegratorOptions& opt, const Box& domain, FlowMode mode) {
    const Rhs rhs = [&F](const Vec3& u) { return F(u); };
    const Event ev{[&g](const Vec3& u) { return g(u); }, true};
    FlowResult r = integrate(rhs, u0, t_max, std::span<const Event>(&ev, 1), opt, domain);
    const StopReason stop = r.stop;
    TrajectorySegment seg = to_segment(std::move(r), mode);
    seg.terminal = stop == StopReason::Event       ? Terminal::ManifoldHit
                   : stop == StopReason::DomainExit ? Terminal::DomainExit
                                                    : Terminal::TimeOut;
    return seg;
}

}  // namespace

VectorFieldExpr parse_field(const std::array<std::string, 3>& text, const ParamMap& params) {
    VectorFieldExpr f;
    f.params = params;
    for (int i = 0; i < 3; ++i) {
        try {
            f.components[i] = parse_expr(text[i], params);
        } catch (const SyntaxError& e) {
            throw SyntaxError(e.offset(), std::string("component ") + component_name(i) + ": '" + text[i] + "'");
        }
    }
    return f;
}

SwitchingFunction make_switching(Expr g) {
    SwitchingFunction s;
    s.gradient = {g.derivative(0), g.derivative(1), g.derivative(2)};
    s.expr = std::move(g);
    return s;
}

SwitchingFunction parse_switching(std::string_view text, const ParamMap& params) {
    return make_switching(parse_expr(text, params));
}

double lie_derivative(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u) {
    const Vec3 f = F(u);
    const double v = g.expr.directional(u, f).d;
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "Lie derivative overflowed");
    return v;
}

double second_lie_derivative(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u) {
    const Vec3 f = F(u);
    const auto d = dual_point(u, f);
    const std::span<const Dual, 3> s(d);
    Dual acc{0.0, 0.0};
    for (int i = 0; i < 3; ++i) acc = acc + F.components[i].eval<Dual>(s) * g.gradient[i].eval<Dual>(s);
    if (!std::isfinite(acc.d)) throw Error(ErrorCode::NonFinite, "second Lie derivative overflowed");
    return acc.d;
}

const char* to_string(Region r) {
    switch (r) {
        case Region::Crossing: return "crossing";
        case Region::Sliding: return "sliding";
        case Region::Escaping: return "escaping";
        case Region::TangencyX: return "tangency_x";
        case Region::TangencyY: return "tangency_y";
        case Region::TangencyBoth: return "tangency_xy";
    }
    return "?";
}

Region classify_signs(double Xg, double Yg, double tol) {
    const bool tx = std::abs(Xg) <= tol;
    const bool ty = std::abs(Yg) <= tol;
    if (tx && ty) return Region::TangencyBoth;
    if (tx) return Region::TangencyX;
    if (ty) return Region::TangencyY;
    if (Xg * Yg > 0.0) return Region::Crossing;
    return Xg < 0.0 ? Region::Sliding : Region::Escaping;
}

RegionInfo classify_region(const FilippovSystem& Z, const Vec3& u) {
    const double gv = Z.g(u);
    if (!(std::abs(gv) <= Z.tol.manifold)) {
        throw Error(ErrorCode::OffManifold, "|g| = " + std::to_string(std::abs(gv)));
    }
    const double Xg = lie_derivative(Z.X, Z.g, u);
    const double Yg = lie_derivative(Z.Y, Z.g, u);
    return {classify_signs(Xg, Yg, Z.tol.tangency), Xg, Yg};
}

Vec3 sliding_field(const FilippovSystem& Z, const Vec3& u) {
    const Vec3 x = Z.X(u);
    const Vec3 y = Z.Y(u);
    const Vec3 n = Z.g.grad(u);
    const double Xg = dot(x, n);
    const double Yg = dot(y, n);
    const double den = Yg - Xg;
    if (std::abs(den) < Z.tol.tangency) throw Error(ErrorCode::DenominatorVanishes, "Yg - Xg ~ 0");
    return (Yg * x - Xg * y) / den;
}

FoldInfo classify_tangency(const FilippovSystem& Z, const Vec3& u) {
    const double Xg = lie_derivative(Z.X, Z.g, u);
    const double Yg = lie_derivative(Z.Y, Z.g, u);
    const double tol = Z.tol.tangency;
    FoldInfo info{};
    if (std::abs(Xg) <= tol) {
        const double x2 = second_lie_derivative(Z.X, Z.g, u);
        if (std::abs(x2) <= tol) throw Error(ErrorCode::DegenerateTangency, "X^2 g ~ 0");
        info.kind = x2 > 0.0 ? FoldKind::VisibleFoldX : FoldKind::InvisibleFoldX;
        info.first = Xg;
        info.second = x2;
        info.other = Yg;
        info.fold_regular = std::abs(Yg) > tol;
        info.side = !info.fold_regular ? FoldSide::None : Yg > 0.0 ? FoldSide::SlidingBoundary : FoldSide::EscapingBoundary;
        return info;
    }
    if (std::abs(Yg) <= tol) {
        const double y2 = second_lie_derivative(Z.Y, Z.g, u);
        if (std::abs(y2) <= tol) throw Error(ErrorCode::DegenerateTangency, "Y^2 g ~ 0");
        // Y lives on g < 0, so it is visible when it bends away from M downwards
        info.kind = y2 < 0.0 ? FoldKind::VisibleFoldY : FoldKind::InvisibleFoldY;
        info.first = Yg;
        info.second = y2;
        info.other = Xg;
        info.fold_regular = true;
        info.side = Xg < 0.0 ? FoldSide::SlidingBoundary : FoldSide::EscapingBoundary;
        return info;
    }
    throw Error(ErrorCode::DegenerateTangency, "point is not a tangency (|Xg|, |Yg| > tol)");
}

Vec3 project_to_manifold(const SwitchingFunction& g, const Vec3& u, int iterations) {
    Vec3 v = u;
    for (int i = 0; i < iterations; ++i) {
        const double gv = g(v);
        if (gv == 0.0) break;
        const Vec3 n = g.grad(v);
        const double nn = dot(n, n);
        if (nn == 0.0) break;
        v = v - (gv / nn) * n;
    }
    return v;
}

const char* to_string(PseudoKind k) {
    switch (k) {
        case PseudoKind::PseudoSaddleFocus: return "pseudo_saddle_focus";
        case PseudoKind::StablePseudoFocus: return "stable_pseudo_focus";
        case PseudoKind::PseudoNode: return "pseudo_node";
        case PseudoKind::PseudoSaddle: return "pseudo_saddle";
    }
    return "?";
}

PseudoEquilibrium find_pseudo_equilibrium(const FilippovSystem& Z, const Vec3& seed, const NewtonOptions& opt) {
    Vec3 u = project_to_manifold(Z.g, seed, 8);

    auto chart_residual = [&](const Vec3& c, const TangentFrame& fr, double a, double b) {
        const Vec3 v = project_to_manifold(Z.g, c + a * fr.e1 + b * fr.e2, 4);
        const Vec3 z = sliding_field(Z, v);
        return std::array<double, 2>{dot(z, fr.e1), dot(z, fr.e2)};
    };
    auto jacobian = [&](const Vec3& c, const TangentFrame& fr) {
        const double h = opt.fd_step * std::max(1.0, norm(c));
        const auto fa = chart_residual(c, fr, h, 0.0);
        const auto fa_ = chart_residual(c, fr, -h, 0.0);
        const auto fb = chart_residual(c, fr, 0.0, h);
        const auto fb_ = chart_residual(c, fr, 0.0, -h);
        return std::array<double, 4>{(fa[0] - fa_[0]) / (2 * h), (fb[0] - fb_[0]) / (2 * h),
                                     (fa[1] - fa_[1]) / (2 * h), (fb[1] - fb_[1]) / (2 * h)};
    };

    bool converged = false;
    double res = 0.0;
    try {
        for (int it = 0; it < opt.max_iter; ++it) {
            res = norm(sliding_field(Z, u));
            if (res < opt.tol) {
                converged = true;
                break;
            }
            const TangentFrame fr = tangent_frame(Z.g.grad(u));
            const auto F = chart_residual(u, fr, 0.0, 0.0);
            const auto J = jacobian(u, fr);
            const double det = J[0] * J[3] - J[1] * J[2];
            if (det == 0.0 || !std::isfinite(det)) break;
            double da = -(J[3] * F[0] - J[1] * F[1]) / det;
            double db = -(-J[2] * F[0] + J[0] * F[1]) / det;
            // damped step
            bool improved = false;
            for (int k = 0; k < 30; ++k) {
                const Vec3 cand = project_to_manifold(Z.g, u + da * fr.e1 + db * fr.e2, 4);
                if (!Z.domain.contains(cand)) {
                    da *= 0.5;
                    db *= 0.5;
                    continue;
                }
                const double rc = norm(sliding_field(Z, cand));
                if (rc < res) {
                    u = cand;
                    improved = true;
                    break;
                }
                da *= 0.5;
                db *= 0.5;
            }
            if (!improved) break;
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::NoConvergence, std::string("Newton iteration failed: ") + e.what());
    }
    if (!converged) throw Error(ErrorCode::NoConvergence, "residual " + std::to_string(res));

    PseudoEquilibrium pe{};
    pe.point = u;
    pe.residual = res;
    pe.frame = tangent_frame(Z.g.grad(u));
    pe.jacobian = jacobian(u, pe.frame);
    const auto& J = pe.jacobian;
    const double tr = J[0] + J[3];
    const double det = J[0] * J[3] - J[1] * J[2];
    const double disc = tr * tr - 4.0 * det;
    const std::complex<double> sq = std::sqrt(std::complex<double>(disc, 0.0));
    pe.mu1 = 0.5 * (tr + sq);
    pe.mu2 = 0.5 * (tr - sq);
    const double Xg = lie_derivative(Z.X, Z.g, u);
    const double Yg = lie_derivative(Z.Y, Z.g, u);
    pe.region = classify_signs(Xg, Yg, Z.tol.tangency);

    const double tol = Z.tol.hyperbolic;
    if (disc < 0.0) {
        if (std::abs(0.5 * tr) < tol) throw Error(ErrorCode::NotHyperbolic, "focus with Re(mu) ~ 0");
        const bool unstable_sliding = pe.region == Region::Sliding && tr > 0.0;
        const bool unstable_escaping = pe.region == Region::Escaping && tr < 0.0;
        pe.kind = (unstable_sliding || unstable_escaping) ? PseudoKind::PseudoSaddleFocus : PseudoKind::StablePseudoFocus;
    } else {
        if (std::abs(pe.mu1.real()) < tol || std::abs(pe.mu2.real()) < tol) {
            throw Error(ErrorCode::NotHyperbolic, "zero eigenvalue");
        }
        pe.kind = det < 0.0 ? PseudoKind::PseudoSaddle : PseudoKind::PseudoNode;
    }
    return pe;
}

const char* to_string(FlowMode m) {
    switch (m) {
        case FlowMode::FlowX: return "X";
        case FlowMode::FlowY: return "Y";
        case FlowMode::FlowSliding: return "SLIDE";
    }
    return "?";
}

const char* to_string(Terminal t) {
    switch (t) {
        case Terminal::ManifoldHit: return "manifold_hit";
        case Terminal::FoldHit: return "fold_hit";
        case Terminal::SectionHit: return "section_hit";
        case Terminal::TimeOut: return "time_out";
        case Terminal::DomainExit: return "domain_exit";
    }
    return "?";
}

TrajectorySegment flow_to_manifold(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u0, double t_max,
                                   const IntegratorOptions& opt, const Box& domain) {
    TrajectorySegment seg = flow_field(F, g, u0, t_max, opt, domain, FlowMode::FlowX);
    if (seg.terminal == Terminal::TimeOut) {
        throw Error(ErrorCode::NoHit, "no manifold crossing within t_max = " + std::to_string(t_max));
    }
    return seg;
}

TrajectorySegment flow_sliding(const FilippovSystem& Z, const Vec3& w0, const SlidingStop& stop, Direction dir,
                               const IntegratorOptions& opt) {
    const RegionInfo start = classify_region(Z, w0);
    // fold points on the boundary of the sliding/escaping region are admissible starts
    const bool boundary = (start.label == Region::TangencyX && start.Yg > 0.0) ||
                          (start.label == Region::TangencyY && start.Xg < 0.0);
    if (start.label != Region::Sliding && start.label != Region::Escaping && !boundary) {
        throw Error(ErrorCode::LeftSlidingRegion, std::string("start lies in ") + to_string(start.label));
    }
    TrajectorySegment seg;
    seg.mode = FlowMode::FlowSliding;
    seg.backward = dir == Direction::Backward;
    if (stop.kind == SlidingStop::Kind::Section && std::abs(stop.section(w0)) <= opt.tol_event) {
        seg.t = {0.0};
        seg.u = {w0};
        seg.terminal = Terminal::SectionHit;
        return seg;
    }

    const double s = dir == Direction::Forward ? 1.0 : -1.0;
    const Rhs rhs = [&Z, s](const Vec3& u) { return s * sliding_field(Z, u); };
    const Projector proj = [&Z](const Vec3& u) { return project_to_manifold(Z.g, u, 1); };
    std::vector<Event> events{
        {[&Z](const Vec3& u) { return lie_derivative(Z.X, Z.g, u); }, true},
        {[&Z](const Vec3& u) { return lie_derivative(Z.Y, Z.g, u); }, true},
    };
    if (stop.kind == SlidingStop::Kind::Section) events.push_back({stop.section, true});

    FlowResult r = integrate(rhs, w0, stop.t_max, events, opt, Z.domain, proj);
    const StopReason why = r.stop;
    const int ev = r.event;
    seg.t = std::move(r.t);
    seg.u = std::move(r.u);
    if (why == StopReason::Event) {
        seg.terminal = ev == 2 ? Terminal::SectionHit : Terminal::FoldHit;
    } else {
        seg.terminal = why == StopReason::DomainExit ? Terminal::DomainExit : Terminal::TimeOut;
    }
    return seg;
}

std::vector<TrajectorySegment> filippov_trajectory(const FilippovSystem& Z, const Vec3& u0, double T,
                                                   EscapingPolicy policy, const IntegratorOptions& opt) {
    std::vector<TrajectorySegment> out;
    Vec3 u = u0;
    double t = 0.0;
    constexpr int kMaxSegments = 10000;

    auto append = [&](TrajectorySegment seg) {
        for (double& ti : seg.t) ti += t;
        t = seg.t.back();
        u = seg.u.back();
        const Terminal term = seg.terminal;
        out.push_back(std::move(seg));
        return term;
    };
    auto sliding = [&]() {
        SlidingStop stop;
        stop.kind = SlidingStop::Kind::Time;
        stop.t_max = T - t;
        return append(flow_sliding(Z, u, stop, Direction::Forward, opt));
    };

    for (int n = 0; n < kMaxSegments && t < T; ++n) {
        const double gv = Z.g(u);
        Terminal term = Terminal::TimeOut;
        if (std::abs(gv) > Z.tol.manifold) {
            const bool above = gv > 0.0;
            term = append(flow_field(above ? Z.X : Z.Y, Z.g, u, T - t, opt, Z.domain,
                                     above ? FlowMode::FlowX : FlowMode::FlowY));
        } else {
            const RegionInfo info = classify_region(Z, u);
            switch (info.label) {
                case Region::Crossing: {
                    const bool up = info.Xg > 0.0;
                    term = append(flow_field(up ? Z.X : Z.Y, Z.g, u, T - t, opt, Z.domain,
                                             up ? FlowMode::FlowX : FlowMode::FlowY));
                    break;
                }
                case Region::Sliding: term = sliding(); break;
                case Region::Escaping:
                    switch (policy) {
                        case EscapingPolicy::Error:
                            throw Error(ErrorCode::NonUniqueForward, "escaping point; choose an escaping policy");
                        case EscapingPolicy::FollowX:
                            term = append(flow_field(Z.X, Z.g, u, T - t, opt, Z.domain, FlowMode::FlowX));
                            break;
                        case EscapingPolicy::FollowY:
                            term = append(flow_field(Z.Y, Z.g, u, T - t, opt, Z.domain, FlowMode::FlowY));
                            break;
                        case EscapingPolicy::FollowSliding: term = sliding(); break;
                    }
                    break;
                case Region::TangencyX: {
                    const FoldInfo f = classify_tangency(Z, u);
                    if (f.kind == FoldKind::VisibleFoldX) {
                        term = append(flow_field(Z.X, Z.g, u, T - t, opt, Z.domain, FlowMode::FlowX));
                    } else if (info.Yg < 0.0) {
                        term = append(flow_field(Z.Y, Z.g, u, T - t, opt, Z.domain, FlowMode::FlowY));
                    } else {
                        throw Error(ErrorCode::DegenerateTangency, "invisible X fold on the sliding boundary");
                    }
                    break;
                }
                case Region::TangencyY: {
                    const FoldInfo f = classify_tangency(Z, u);
                    if (f.kind == FoldKind::VisibleFoldY) {
                        term = append(flow_field(Z.Y, Z.g, u, T - t, opt, Z.domain, FlowMode::FlowY));
                    } else if (info.Xg > 0.0) {
                        term = append(flow_field(Z.X, Z.g, u, T - t, opt, Z.domain, FlowMode::FlowX));
                    } else {
                        throw Error(ErrorCode::DegenerateTangency, "invisible Y fold on the sliding boundary");
                    }
                    break;
                }
                case Region::TangencyBoth:
                default: throw Error(ErrorCode::DegenerateTangency, "both fields tangent to M");
            }
        }
        if (term == Terminal::DomainExit || term == Terminal::TimeOut) break;
        if (out.back().duration() <= 0.0 && out.size() > 2 && out[out.size() - 2].duration() <= 0.0) {
            throw Error(ErrorCode::DegenerateTangency, "trajectory makes no progress");
        }
    }
    return out;
}

}  // namespace ssc
