#include "ssc/bench.hpp"

#include <cmath>

#include "ssc/errors.hpp"

namespace ssc {

SscBenchText ssc_bench_text(const SscBenchParams& p) {
    SscBenchText t;
    t.X = {"a*x - b*y + (u1 - nu*x)*tanh(k*z)", "b*x + a*y + (u2 - nu*y)*tanh(k*z)", "x - 1 + w*tanh(k*z)"};
    t.Y = {"0", "0", "1"};
    t.g = "z";
    t.params = {{"a", p.alpha}, {"b", p.beta}, {"k", p.kappa}, {"w", p.w}, {"nu", p.nu}, {"u1", p.u1}, {"u2", p.u2}};
    return t;
}

FilippovSystem make_ssc_bench(const SscBenchParams& p) {
    const SscBenchText t = ssc_bench_text(p);
    FilippovSystem Z;
    Z.X = parse_field(t.X, t.params);
    Z.Y = parse_field(t.Y, t.params);
    Z.g = parse_switching(t.g, t.params);
    return Z;
}

namespace {

struct Landing {
    Vec3 point;
    double time;
};

Landing land(const SscBenchParams& p) {
    const FilippovSystem Z = make_ssc_bench(p);
    IntegratorOptions opt;
    opt.rtol = 1e-13;
    opt.atol = 1e-15;
    opt.record = false;
    const TrajectorySegment seg = flow_to_manifold(Z.X, Z.g, {1.0, 0.0, 0.0}, 100.0, opt, Z.domain);
    if (seg.terminal != Terminal::ManifoldHit) throw Error(ErrorCode::NoHit, "shooting orbit left the domain");
    return {seg.end(), seg.duration()};
}

}  // namespace

ShootingResult shoot_ssc_bench(const SscBenchParams& guess, double tol, int max_iter) {
    SscBenchParams p = guess;
    Landing L = land(p);
    double res = std::hypot(L.point[0], L.point[1]);
    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        const double h = 1e-7;
        SscBenchParams p1 = p;
        p1.u1 += h;
        SscBenchParams p2 = p;
        p2.u2 += h;
        const Vec3 a = land(p1).point;
        const Vec3 b = land(p2).point;
        const double j00 = (a[0] - L.point[0]) / h, j10 = (a[1] - L.point[1]) / h;
        const double j01 = (b[0] - L.point[0]) / h, j11 = (b[1] - L.point[1]) / h;
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0 || !std::isfinite(det)) break;
        double d1 = -(j11 * L.point[0] - j01 * L.point[1]) / det;
        double d2 = -(-j10 * L.point[0] + j00 * L.point[1]) / det;
        bool improved = false;
        for (int k = 0; k < 20; ++k) {
            SscBenchParams c = p;
            c.u1 += d1;
            c.u2 += d2;
            try {
                const Landing Lc = land(c);
                const double rc = std::hypot(Lc.point[0], Lc.point[1]);
                if (rc < res) {
                    p = c;
                    L = Lc;
                    res = rc;
                    improved = true;
                    break;
                }
            } catch (const Error&) {
            }
            d1 *= 0.5;
            d2 *= 0.5;
        }
        if (!improved) break;
    }
    if (res > 1e-10) throw Error(ErrorCode::NoConvergence, "shooting residual " + std::to_string(res));
    return {p, res, L.time, it};
}

}  // namespace ssc
