#include "ssc/returnmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const IntegratorOptions& pick(const ReturnMapOptions& o, Accuracy a) {
    return a == Accuracy::Precise ? o.precise : o.scan;
}

double ulp(double x) {
    const double ax = std::abs(x);
    return std::nextafter(ax, std::numeric_limits<double>::infinity()) - ax;
}

bool in_domain(const ReturnMapContext& ctx, double w, Accuracy acc, double* value = nullptr) {
    try {
        const ReturnResult r = first_return(ctx, w, acc);
        if (value) *value = r.value;
        return true;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SectionMiss || e.code() == ErrorCode::HitOutsideSliding) return false;
        throw;
    }
}

// X flight in extended precision; the landing point feeds a strongly
// expanding sliding passage, so double rounding along the path shows up as noise.
FlightResult flight_long(const FilippovSystem& Z, const Vec3& u0, double t_max, const IntegratorOptions& opt) {
    using L = long double;
    const auto& X = Z.X;
    const auto& g = Z.g.expr;
    const BasicRhs<L> rhs = [&X](const Vec3T<L>& u) {
        const std::span<const L, 3> s(u.data(), 3);
        return Vec3T<L>{X.components[0].eval<L>(s), X.components[1].eval<L>(s), X.components[2].eval<L>(s)};
    };
    const BasicEvent<L> ev{[&g](const Vec3T<L>& u) { return g.eval<L>(std::span<const L, 3>(u.data(), 3)); }, true};
    const BasicFlowResult<L> r =
        integrate<L>(rhs, convert<L>(u0), static_cast<L>(t_max), std::span<const BasicEvent<L>>(&ev, 1), opt, Z.domain);
    if (r.stop != StopReason::Event) throw Error(ErrorCode::NoHit, "X orbit did not return to the switching manifold");
    return {convert<double>(r.end()), static_cast<double>(r.end_time())};
}

}  // namespace

Vec3 lie_gradient(const VectorFieldExpr& F, const SwitchingFunction& g, const Vec3& u) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        std::array<Dual, 3> d{Dual{u[0], 0.0}, Dual{u[1], 0.0}, Dual{u[2], 0.0}};
        d[i].d = 1.0;
        const std::span<const Dual, 3> s(d);
        Dual acc{0.0, 0.0};
        for (int j = 0; j < 3; ++j) acc = acc + F.components[j].eval<Dual>(s) * g.gradient[j].eval<Dual>(s);
        out[i] = acc.d;
    }
    return out;
}

Vec3 project_to_fold(const FilippovSystem& Z, const Vec3& u, int iterations) {
    Vec3 v = u;
    for (int it = 0; it < iterations; ++it) {
        const double G0 = Z.g(v);
        const double G1 = lie_derivative(Z.X, Z.g, v);
        if (std::abs(G0) < 1e-16 && std::abs(G1) < 1e-16) break;
        const Vec3 a = Z.g.grad(v);
        const Vec3 b = lie_gradient(Z.X, Z.g, v);
        // minimal-norm Newton step: dv = -J^T (J J^T)^{-1} G
        const double m00 = dot(a, a), m01 = dot(a, b), m11 = dot(b, b);
        const double det = m00 * m11 - m01 * m01;
        if (det == 0.0) throw Error(ErrorCode::FoldRegularityLost, "fold curve is singular");
        const double y0 = (m11 * G0 - m01 * G1) / det;
        const double y1 = (-m01 * G0 + m00 * G1) / det;
        v = v - (y0 * a + y1 * b);
    }
    return v;
}

ShilnikovCertificate verify_connection(const FilippovSystem& Z, const Vec3& p_seed, const Vec3& q_seed,
                                       const ReturnMapOptions& opt) {
    ShilnikovCertificate c;
    const PseudoEquilibrium pe = find_pseudo_equilibrium(Z, p_seed);
    if (pe.kind != PseudoKind::PseudoSaddleFocus || pe.region != Region::Sliding) {
        throw Error(ErrorCode::NotAFocus, std::string("pseudo-equilibrium is a ") + to_string(pe.kind) + " in the " +
                                              to_string(pe.region) + " region");
    }
    c.p = pe.point;
    c.mu = pe.mu1.imag() > 0.0 ? pe.mu1 : pe.mu2;
    c.frame = pe.frame;
    c.lambda_hat = std::exp(kTwoPi * std::abs(c.mu.real()) / std::abs(c.mu.imag()));

    c.q = project_to_fold(Z, q_seed);
    const FoldInfo fi = classify_tangency(Z, c.q);
    if (fi.kind != FoldKind::VisibleFoldX || !fi.fold_regular || fi.side != FoldSide::SlidingBoundary) {
        throw Error(ErrorCode::FoldRegularityLost, "q is not a visible fold-regular point on the sliding boundary");
    }

    auto land = [&](const Vec3& u) { return flight_long(Z, u, opt.t_flight, opt.precise); };
    // Gauss-Newton along the fold curve: slide q until its X orbit lands on p
    FlightResult flight = land(c.q);
    for (int it = 0; it < 20; ++it) {
        const Vec3 d = flight.point - c.p;
        if (norm(d) < 1e-15) break;
        const Vec3 t = cross(Z.g.grad(c.q), lie_gradient(Z.X, Z.g, c.q));
        const Vec3 tu = t / norm(t);
        const double h = 1e-7;
        const Vec3 D = (land(project_to_fold(Z, c.q + h * tu)).point - flight.point) / h;
        const double dd = dot(D, D);
        if (dd == 0.0) break;
        const double step = -dot(d, D) / dd;
        const Vec3 cand = project_to_fold(Z, c.q + step * tu);
        const FlightResult fc = land(cand);
        if (!(norm(fc.point - c.p) < norm(d))) break;
        c.q = cand;
        flight = fc;
    }
    c.t_q = flight.time;
    c.residual = norm(flight.point - c.p);
    if (!(c.residual < opt.tol_connection)) {
        throw Error(ErrorCode::ConnectionResidualTooLarge, "|phi_X(q) - p| = " + std::to_string(c.residual));
    }

    // backward sliding orbit of q, sampled once per focus period
    const double period = kTwoPi / std::abs(c.mu.imag());
    Vec3 u = c.q;
    double t = 0.0;
    const double d0 = norm(u - c.p);
    c.backward_times.push_back(0.0);
    c.backward_decay.push_back(d0);
    SlidingStop stop;
    stop.kind = SlidingStop::Kind::Time;
    stop.t_max = period;
    for (int k = 0; k < opt.max_periods; ++k) {
        const TrajectorySegment seg = flow_sliding(Z, u, stop, Direction::Backward, opt.precise);
        if (seg.terminal != Terminal::TimeOut) {
            throw Error(ErrorCode::BackwardDivergence, "backward sliding orbit of q left the sliding region");
        }
        u = seg.end();
        t += seg.duration();
        const double d = norm(u - c.p);
        if (!(d < c.backward_decay.back())) {
            throw Error(ErrorCode::BackwardDivergence, "distance to p stopped decreasing");
        }
        c.backward_times.push_back(t);
        c.backward_decay.push_back(d);
        if (d < 1e-6 * d0 || d < 100.0 * std::max(c.residual, 1e-14)) break;
    }
    if (c.backward_decay.size() < 4) throw Error(ErrorCode::BackwardDivergence, "too few decay samples");
    // least-squares slope of log d against t
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(c.backward_times.size());
    for (std::size_t i = 0; i < c.backward_times.size(); ++i) {
        const double ti = c.backward_times[i];
        const double yi = std::log(c.backward_decay[i]);
        st += ti;
        sy += yi;
        stt += ti * ti;
        sty += ti * yi;
    }
    c.decay_rate = -(n * sty - st * sy) / (n * stt - st * st);
    return c;
}

Vec3 FoldSegment::point(const FilippovSystem& Z, double w) const {
    if (!(std::abs(w) <= 1.0 + 1e-12)) throw Error(ErrorCode::OutOfChart, "w = " + std::to_string(w));
    const double sw = std::clamp(w, -1.0, 1.0) * r;
    const auto it = std::upper_bound(s.begin(), s.end(), sw);
    std::size_t k = static_cast<std::size_t>(std::distance(s.begin(), it));
    k = std::clamp<std::size_t>(k, 1, s.size() - 1) - 1;
    const double f = (sw - s[k]) / (s[k + 1] - s[k]);
    const Vec3 guess = nodes[k] + f * (nodes[k + 1] - nodes[k]);
    if (f == 0.0) return nodes[k];
    if (f == 1.0) return nodes[k + 1];
    // correct onto the curve while keeping the arclength parameter
    const Vec3 tangent = (nodes[k + 1] - nodes[k]) / norm(nodes[k + 1] - nodes[k]);
    Vec3 v = project_to_fold(Z, guess, 4);
    v = v + dot(guess - v, tangent) * tangent;
    return project_to_fold(Z, v, 4);
}

double FoldSegment::chart(const Vec3& u) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    double best_f = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const Vec3 d = nodes[k + 1] - nodes[k];
        const double f = dot(u - nodes[k], d) / dot(d, d);
        const double fc = std::clamp(f, 0.0, 1.0);
        const double dist = norm(u - (nodes[k] + fc * d));
        if (dist < best_d) {
            best_d = dist;
            best = k;
            best_f = f;
        }
    }
    // extrapolate linearly beyond the end nodes so points past gamma_r map outside [-1, 1]
    if (best != 0 && best + 2 != nodes.size()) best_f = std::clamp(best_f, 0.0, 1.0);
    if (best == 0 && best + 2 != nodes.size()) best_f = std::min(best_f, 1.0);
    if (best + 2 == nodes.size() && best != 0) best_f = std::max(best_f, 0.0);
    const double sv = s[best] + best_f * (s[best + 1] - s[best]);
    return sv / r;
}

FoldSegment build_fold_segment(const FilippovSystem& Z, const Vec3& q, double r, const ReturnMapOptions& opt) {
    if (!(r > 0.0)) throw Error(ErrorCode::ConfigError, "radius must be positive");
    FoldSegment fs;
    fs.q = project_to_fold(Z, q);
    fs.r = r;

    auto check = [&Z](const Vec3& u) {
        if (!Z.domain.contains(u)) throw Error(ErrorCode::CurveEscapesDomain, "fold continuation left the domain box");
        FoldInfo fi;
        try {
            fi = classify_tangency(Z, u);
        } catch (const Error& e) {
            throw Error(ErrorCode::FoldRegularityLost, e.what());
        }
        if (fi.kind != FoldKind::VisibleFoldX || !fi.fold_regular || fi.side != FoldSide::SlidingBoundary) {
            throw Error(ErrorCode::FoldRegularityLost, "continuation reached a non visible-fold-regular point");
        }
    };
    check(fs.q);

    auto tangent = [&Z](const Vec3& u) {
        const Vec3 t = cross(Z.g.grad(u), lie_gradient(Z.X, Z.g, u));
        const double n = norm(t);
        if (n == 0.0) throw Error(ErrorCode::FoldRegularityLost, "fold curve is singular");
        return t / n;
    };
    const Vec3 t0 = tangent(fs.q);
    const int n = std::max(opt.fold_nodes, 2);
    const double ds = r / n;

    std::vector<Vec3> pos{fs.q};
    std::vector<double> spos{0.0};
    std::vector<Vec3> neg;
    std::vector<double> sneg;
    for (int dir : {1, -1}) {
        Vec3 u = fs.q;
        Vec3 tprev = dir * t0;
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            Vec3 tk = tangent(u);
            if (dot(tk, tprev) < 0.0) tk = -1.0 * tk;
            const double step = (k + 1 == n) ? (r - s) : ds;
            Vec3 v = project_to_fold(Z, u + step * tk);
            // rescale the chord so the accumulated arclength stays exact at the end
            for (int fix = 0; fix < 3 && k + 1 == n; ++fix) {
                const double chord = norm(v - u);
                if (chord == 0.0) break;
                v = project_to_fold(Z, u + (step / chord) * (v - u));
            }
            check(v);
            s += norm(v - u);
            tprev = tk;
            u = v;
            if (dir > 0) {
                pos.push_back(u);
                spos.push_back(s);
            } else {
                neg.push_back(u);
                sneg.push_back(-s);
            }
        }
    }
    std::reverse(neg.begin(), neg.end());
    std::reverse(sneg.begin(), sneg.end());
    fs.nodes = neg;
    fs.s = sneg;
    fs.nodes.insert(fs.nodes.end(), pos.begin(), pos.end());
    fs.s.insert(fs.s.end(), spos.begin(), spos.end());
    // normalize so the ends sit exactly at -r and r
    const double lo = -fs.s.front();
    const double hi = fs.s.back();
    for (double& v : fs.s) v = v < 0.0 ? v * (r / lo) : v * (r / hi);
    return fs;
}

FlightResult theta_X(const ReturnMapContext& ctx, double w, Accuracy acc) {
    const Vec3 u = ctx.fold.point(ctx.Z, w);
    FlightResult fl;
    if (acc == Accuracy::Precise) {
        fl = flight_long(ctx.Z, u, ctx.opt.t_flight, ctx.opt.precise);
    } else {
        const TrajectorySegment seg = flow_to_manifold(ctx.Z.X, ctx.Z.g, u, ctx.opt.t_flight, ctx.opt.scan, ctx.Z.domain);
        if (seg.terminal != Terminal::ManifoldHit) throw Error(ErrorCode::NoHit, "X orbit left the domain");
        fl = {seg.end(), seg.duration()};
    }
    const Vec3 hit = fl.point;
    const double Xg = lie_derivative(ctx.Z.X, ctx.Z.g, hit);
    const double Yg = lie_derivative(ctx.Z.Y, ctx.Z.g, hit);
    if (classify_signs(Xg, Yg, ctx.Z.tol.tangency) != Region::Sliding) {
        throw Error(ErrorCode::HitOutsideSliding, "theta_X(" + std::to_string(w) + ") is not a sliding point");
    }
    return fl;
}

ReturnResult first_return(const ReturnMapContext& ctx, double w, Accuracy acc) {
    const FlightResult fl = theta_X(ctx, w, acc);
    const double floor = 10.0 * std::max(ctx.cert.residual, 1e-15);
    if (norm(fl.point - ctx.cert.p) <= floor) {
        throw Error(ErrorCode::SectionMiss, "theta_X(w) sits on the pseudo-equilibrium");
    }
    SlidingStop stop;
    stop.kind = SlidingStop::Kind::FoldBoundary;
    stop.t_max = ctx.opt.t_sliding;
    IntegratorOptions io = pick(ctx.opt, acc);
    io.record = true;
    const TrajectorySegment seg = flow_sliding(ctx.Z, fl.point, stop, Direction::Forward, io);
    if (seg.terminal != Terminal::FoldHit) throw Error(ErrorCode::SectionMiss, "sliding orbit did not reach the fold");
    const Vec3 hit = seg.end();
    if (!(std::abs(lie_derivative(ctx.Z.X, ctx.Z.g, hit)) < 1e-9)) {
        throw Error(ErrorCode::SectionMiss, "sliding orbit left through the other boundary");
    }
    const double x = ctx.fold.chart(hit);
    if (!(std::abs(x) <= 1.0)) throw Error(ErrorCode::SectionMiss, "hit lies outside gamma_r");

    // unwrapped angle about p in the tangent frame at p
    const auto& fr = ctx.cert.frame;
    auto angle = [&](const Vec3& v) {
        const Vec3 d = v - ctx.cert.p;
        return std::atan2(dot(d, fr.e2), dot(d, fr.e1));
    };
    double total = 0.0;
    double prev = angle(seg.u.front());
    for (std::size_t i = 1; i < seg.u.size(); ++i) {
        const double a = angle(seg.u[i]);
        double d = a - prev;
        while (d > std::numbers::pi) d -= kTwoPi;
        while (d < -std::numbers::pi) d += kTwoPi;
        total += d;
        prev = a;
    }
    return {x, std::abs(total) / kTwoPi, fl.point, hit, seg.duration()};
}

const char* to_string(Side s) { return s == Side::L ? "L" : "R"; }

int default_imax(double lambda, double r, double residual, int cap) {
    if (!(lambda > 1.0)) return 2;
    const double floor_v = std::floor(std::log(r / (10.0 * std::max(residual, 1e-16))) / std::log(lambda));
    return std::clamp(static_cast<int>(floor_v), 2, cap);
}

BranchScan enumerate_branches(const ReturnMapContext& ctx, int i_max) {
    if (i_max < 2) throw Error(ErrorCode::ConfigError, "i_max must be at least 2");
    const double lam = ctx.cert.lambda_hat;
    if (!(lam > 1.0)) throw Error(ErrorCode::NotAFocus, "lambda_hat <= 1");
    const auto& o = ctx.opt;
    const int N = std::max(o.scan_points / 2, 16);
    const double log_min = -(i_max + 1.5) * std::log(lam);
    BranchScan out;
    std::size_t& evals = out.evaluations;

    auto status = [&](double w, Accuracy acc) {
        ++evals;
        return in_domain(ctx, w, acc);
    };
    auto pi = [&](double w) {
        ++evals;
        return first_return(ctx, w, Accuracy::Precise).value;
    };
    // boolean bisection between an in-domain and an out-of-domain parameter
    auto refine = [&](double in, double out_w) {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (in + out_w);
            if (mid == in || mid == out_w) break;
            if (std::abs(in - out_w) <= 2.0 * ulp(std::max(std::abs(in), std::abs(out_w)))) break;
            if (status(mid, Accuracy::Precise)) {
                in = mid;
            } else {
                out_w = mid;
            }
        }
        return in;
    };

    const double width_floor = 10.0 * std::max(ctx.cert.residual, ctx.opt.precise.tol_event) / ctx.fold.r;

    for (Side side : {Side::L, Side::R}) {
        const double sgn = side == Side::L ? -1.0 : 1.0;
        std::vector<double> grid(N);
        std::vector<char> in(N);
        for (int k = 0; k < N; ++k) {
            grid[k] = sgn * std::exp(log_min * k / (N - 1));
            in[k] = status(grid[k], Accuracy::Scan) ? 1 : 0;
        }
        int index = 0;
        int k = 0;
        while (k < N && index <= i_max) {
            if (!in[k]) {
                ++k;
                continue;
            }
            const int a = k;
            while (k < N && in[k]) ++k;
            const int b = k - 1;
            const int this_index = index++;
            if (this_index == 0) continue;  // outermost branch is not required to be surjective
            if (b == N - 1) {
                throw Error(ErrorCode::BranchResolutionExceeded,
                            "branch " + std::to_string(this_index) + " reaches the inner end of the scan");
            }
            // the scan profile can misjudge points next to an edge: confirm the outside neighbour
            auto edge = [&](int k_in, int step) {
                int k_out = k_in + step;
                while (k_out >= 0 && k_out < N && status(grid[k_out], Accuracy::Precise)) {
                    k_in = k_out;
                    k_out += step;
                }
                if (k_out < 0 || k_out >= N) return grid[k_in];
                return refine(grid[k_in], grid[k_out]);
            };
            const double outer = a == 0 ? grid[0] : edge(a, -1);
            const double inner = edge(b, +1);
            Branch J;
            J.side = side;
            J.index = this_index;
            J.winding = this_index - 1;
            J.lo = std::min(outer, inner);
            J.hi = std::max(outer, inner);
            if (J.width() < width_floor) {
                throw Error(ErrorCode::BranchResolutionExceeded,
                            "branch " + std::to_string(this_index) + " is narrower than the noise floor");
            }
            J.image_lo = pi(J.lo);
            J.image_hi = pi(J.hi);

            const int ns = std::max(o.derivative_samples, 3);
            const double h = 1e-5 * J.width();
            double dmin = std::numeric_limits<double>::infinity();
            double dmax = 0.0;
            int positive = 0;
            for (int s = 0; s < ns; ++s) {
                const double w = J.lo + (s + 0.5) / ns * J.width();
                const double d = (pi(w + h) - pi(w - h)) / (2.0 * h);
                if (d > 0.0) ++positive;
                const double inv = 1.0 / std::abs(d);
                dmin = std::min(dmin, inv);
                dmax = std::max(dmax, inv);
            }
            if (positive != 0 && positive != ns) {
                throw Error(ErrorCode::BranchResolutionExceeded,
                            "pi is not monotone on branch " + std::to_string(this_index));
            }
            J.increasing = positive == ns;
            J.deriv_lo = dmin / o.safety;
            J.deriv_hi = dmax * o.safety;

            J.surrogate = Chebyshev([&](double w) { return pi(w); }, J.lo, J.hi, o.surrogate_nodes);
            double err = std::max(std::abs(J.surrogate(J.lo) - J.image_lo), std::abs(J.surrogate(J.hi) - J.image_hi));
            for (int s = 0; s < 4; ++s) {
                const double w = J.lo + (s + 0.37) / 4.0 * J.width();
                err = std::max(err, std::abs(J.surrogate(w) - pi(w)));
            }
            J.surrogate_error = err;
            ++evals;
            J.turns = first_return(ctx, 0.5 * (J.lo + J.hi), Accuracy::Precise).turns;
            out.branches.push_back(std::move(J));
        }
        if (index <= i_max) {
            throw Error(ErrorCode::BranchResolutionExceeded,
                        "found only " + std::to_string(index - 1) + " complete branches on side " + to_string(side));
        }
    }
    return out;
}

double branch_inverse(const ReturnMapContext& ctx, const Branch& J, double x) {
    const double tol = ctx.opt.surjectivity_tol;
    const double vmin = std::min(J.image_lo, J.image_hi);
    const double vmax = std::max(J.image_lo, J.image_hi);
    if (x < vmin - tol || x > vmax + tol) {
        throw Error(ErrorCode::NotSurjective, "x = " + std::to_string(x) + " outside the image of branch " +
                                                  std::string(to_string(J.side)) + std::to_string(J.index));
    }
    if (x <= vmin) return J.image_lo <= J.image_hi ? J.lo : J.hi;
    if (x >= vmax) return J.image_lo <= J.image_hi ? J.hi : J.lo;

    // Illinois variant of regula falsi
    double a = J.lo, b = J.hi;
    double fa = J.image_lo - x, fb = J.image_hi - x;
    int side = 0;
    double w = a;
    for (int it = 0; it < 200; ++it) {
        w = (a * fb - b * fa) / (fb - fa);
        if (!(w > a && w < b)) w = 0.5 * (a + b);
        const double fw = first_return(ctx, w, Accuracy::Precise).value - x;
        if (std::abs(fw) < 1e-13) break;
        if ((fw > 0.0) == (fb > 0.0)) {
            b = w;
            fb = fw;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            a = w;
            fa = fw;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
        if (b - a <= 4.0 * ulp(std::max(std::abs(a), std::abs(b)))) break;
    }
    return w;
}

double surrogate_inverse(const Branch& J, double x, double* derivative) {
    const Chebyshev& P = J.surrogate;
    double a = J.lo, b = J.hi;
    double fa = P(a) - x, fb = P(b) - x;
    double w;
    if (fa == 0.0) {
        w = a;
    } else if (fb == 0.0) {
        w = b;
    } else if ((fa > 0.0) == (fb > 0.0)) {
        // outside the surrogate image by rounding: clamp to the nearer end
        w = std::abs(fa) < std::abs(fb) ? a : b;
    } else {
        w = a + (b - a) * fa / (fa - fb);
        for (int it = 0; it < 100; ++it) {
            const double fw = P(w) - x;
            if (fw == 0.0) break;
            if ((fw > 0.0) == (fa > 0.0)) {
                a = w;
                fa = fw;
            } else {
                b = w;
                fb = fw;
            }
            double next = w - fw / P.derivative(w);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (next == w || b - a <= 2.0 * ulp(std::max(std::abs(a), std::abs(b)))) break;
            w = next;
        }
    }
    if (derivative) *derivative = 1.0 / P.derivative(w);
    return w;
}

double estimate_A(const std::vector<Branch>& branches, double lambda) {
    double A = std::numeric_limits<double>::infinity();
    for (const Branch& J : branches) A = std::min(A, 1.0 / (J.deriv_hi * std::pow(lambda, J.winding)));
    return A;
}

int select_U(const std::vector<Branch>& branches, double lambda, double A, double surjectivity_tol) {
    if (!(lambda > 1.0)) throw Error(ErrorCode::NoValidCutoff, "lambda <= 1");
    if (!(A > 0.0)) throw Error(ErrorCode::NoValidCutoff, "A <= 0");
    int top = 0;
    for (const Branch& J : branches) top = std::max(top, J.index);
    for (int i_min = 1; i_min <= top; ++i_min) {
        bool ok = true;
        for (const Branch& J : branches) {
            if (J.index >= i_min && !J.surjective(surjectivity_tol)) ok = false;
        }
        // both sides, i >= i_min: 2 sum (A lambda^{i-1})^{-1}
        const double tail = 2.0 * std::pow(lambda, -(i_min - 1)) / (A * (1.0 - 1.0 / lambda));
        if (ok && tail < 1.0) return i_min;
    }
    throw Error(ErrorCode::NoValidCutoff, "no cutoff up to index " + std::to_string(top) + " satisfies the conditions");
}

double lambda_from_branches(const std::vector<Branch>& branches, int i_from, int i_to) {
    double acc = 0.0;
    int n = 0;
    for (const Branch& a : branches) {
        if (a.index < i_from || a.index >= i_to) continue;
        for (const Branch& b : branches) {
            if (b.side == a.side && b.index == a.index + 1) {
                acc += std::log(a.width() / b.width());
                ++n;
            }
        }
    }
    if (n == 0) throw Error(ErrorCode::LambdaMismatch, "no consecutive branch pairs in range");
    return std::exp(acc / n);
}

void cross_validate_lambda(double eigen, double decay, double tolerance) {
    const double rel = std::abs(decay - eigen) / eigen;
    if (!(rel <= tolerance)) {
        throw Error(ErrorCode::LambdaMismatch, "eigenvalue estimate " + std::to_string(eigen) +
                                                   " vs branch decay " + std::to_string(decay));
    }
}

ReturnMapContext make_return_map(const FilippovSystem& Z, const Vec3& p_seed, const Vec3& q_seed, double r,
                                 const ReturnMapOptions& opt) {
    ReturnMapContext ctx;
    ctx.Z = Z;
    ctx.opt = opt;
    ctx.cert = verify_connection(Z, p_seed, q_seed, opt);
    ctx.fold = build_fold_segment(Z, ctx.cert.q, r, opt);
    return ctx;
}

}  // namespace ssc
