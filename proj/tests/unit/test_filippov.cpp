#include <cmath>
#include <random>

#include "doctest.h"
#include "ssc/bench.hpp"
#include "ssc/errors.hpp"
#include "ssc/filippov.hpp"

using namespace ssc;

namespace {

FilippovSystem system_of(const std::array<std::string, 3>& X, const std::array<std::string, 3>& Y,
                         const std::string& g, const ParamMap& params = {}) {
    FilippovSystem Z;
    Z.X = parse_field(X, params);
    Z.Y = parse_field(Y, params);
    Z.g = parse_switching(g, params);
    return Z;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_SUITE("filippov") {

TEST_CASE("expressions evaluate with standard precedence") {
    CHECK(parse_expr("a*x - b*y", {{"a", 1.0}, {"b", 2.0}})({3.0, 1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(parse_expr("x^2 + sin(0)")({2.0, 0.0, 0.0}) == doctest::Approx(4.0));
    CHECK(parse_expr("-x^2")({3.0, 0.0, 0.0}) == doctest::Approx(-9.0));
    CHECK(parse_expr("2^3^2")({0.0, 0.0, 0.0}) == doctest::Approx(512.0));
    CHECK(parse_expr("1.5e1 / 3 * 2")({0.0, 0.0, 0.0}) == doctest::Approx(10.0));
}

TEST_CASE("parse errors carry offsets") {
    try {
        (void)parse_expr("x*(");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 3);
    }
    CHECK(code_of([] { (void)parse_expr("x + q"); }) == ErrorCode::UnknownIdentifier);
    CHECK(code_of([] { (void)parse_expr("x +* y"); }) == ErrorCode::SyntaxError);
}

TEST_CASE("dual gradients match central differences") {
    const Expr e = parse_expr("sin(x*y) + exp(0.3*z)*tanh(x) - sqrt(1 + y^2)/(2 + cos(z)) + log(3 + x^2)");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int n = 0; n < 50; ++n) {
        const Vec3 u{U(rng), U(rng), U(rng)};
        const auto grad = e.gradient(u);
        for (int i = 0; i < 3; ++i) {
            Vec3 up = u, dn = u;
            up[i] += 1e-6;
            dn[i] -= 1e-6;
            const double fd = (e(up) - e(dn)) / 2e-6;
            CHECK(std::abs(grad[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("lie derivatives") {
    const auto g = parse_switching("z");
    CHECK(lie_derivative(parse_field({"0", "0", "1"}), g, {3.0, -2.0, 0.0}) == doctest::Approx(1.0));
    CHECK(lie_derivative(parse_field({"1", "2", "3"}), parse_switching("x + y + z"), {0.5, 0.1, 9.0}) ==
          doctest::Approx(6.0));
    const FilippovSystem Z = make_ssc_bench({});
    CHECK(std::abs(lie_derivative(Z.X, Z.g, {1.0, 0.4, 0.0})) <= Z.tol.tangency);
}

TEST_CASE("region classification") {
    const double tol = 1e-9;
    CHECK(classify_signs(1.0, 2.0, tol) == Region::Crossing);
    CHECK(classify_signs(-1.0, -2.0, tol) == Region::Crossing);
    CHECK(classify_signs(-1.0, 1.0, tol) == Region::Sliding);
    CHECK(classify_signs(1.0, -1.0, tol) == Region::Escaping);
    CHECK(classify_signs(0.0, 1.0, tol) == Region::TangencyX);
    CHECK(classify_signs(1.0, 0.0, tol) == Region::TangencyY);
    CHECK(classify_signs(0.0, 0.0, tol) == Region::TangencyBoth);
    for (double s : {0.01, 1.0, 250.0})
        for (double t : {0.3, 7.0}) {
            CHECK(classify_signs(-s, t, tol) == Region::Sliding);
            CHECK(classify_signs(s, t, tol) == Region::Crossing);
        }

    const FilippovSystem Z = make_ssc_bench({});
    CHECK(classify_region(Z, {0.2, 0.3, 0.0}).label == Region::Sliding);
    CHECK(classify_region(Z, {1.5, 0.3, 0.0}).label == Region::Crossing);
    CHECK(classify_region(Z, {1.0, 0.3, 0.0}).label == Region::TangencyX);
    CHECK(code_of([&] { (void)classify_region(Z, {0.2, 0.3, 0.1}); }) == ErrorCode::OffManifold);

    // flipping Y swaps sliding and escaping
    FilippovSystem W = Z;
    W.Y = parse_field({"0", "0", "-1"});
    CHECK(classify_region(W, {0.2, 0.3, 0.0}).label == Region::Crossing);
    CHECK(classify_region(W, {1.5, 0.3, 0.0}).label == Region::Escaping);
}

TEST_CASE("sliding field") {
    const FilippovSystem Z = system_of({"0.3", "-0.7", "-2"}, {"0", "0", "1"}, "z");
    const Vec3 v = sliding_field(Z, {0.1, 0.1, 0.0});
    CHECK(v[0] == doctest::Approx(0.3 / 3.0));
    CHECK(v[1] == doctest::Approx(-0.7 / 3.0));
    CHECK(std::abs(v[2]) < 1e-15);

    // Xg = -Yg gives the average
    const FilippovSystem S = system_of({"1", "2", "-1"}, {"3", "-4", "1"}, "z");
    const Vec3 m = sliding_field(S, {0.0, 0.0, 0.0});
    CHECK(m[0] == doctest::Approx(2.0));
    CHECK(m[1] == doctest::Approx(-1.0));

    const FilippovSystem B = make_ssc_bench({});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    for (int n = 0; n < 100; ++n) {
        const Vec3 u{U(rng), U(rng), 0.0};
        const Vec3 w = sliding_field(B, u);
        CHECK(std::abs(dot(w, B.g.grad(u))) <= 1e-12 * std::max(1.0, norm(w)));
    }
}

TEST_CASE("fold classification") {
    const FilippovSystem V = system_of({"1", "0", "x"}, {"0", "0", "1"}, "z");
    const FoldInfo f = classify_tangency(V, {0.0, 0.0, 0.0});
    CHECK(f.kind == FoldKind::VisibleFoldX);
    CHECK(f.second == doctest::Approx(1.0));
    CHECK(f.fold_regular);
    CHECK(f.side == FoldSide::SlidingBoundary);

    const FilippovSystem I = system_of({"-1", "0", "x"}, {"0", "0", "1"}, "z");
    CHECK(classify_tangency(I, {0.0, 0.0, 0.0}).kind == FoldKind::InvisibleFoldX);

    const FilippovSystem D = system_of({"0", "1", "x"}, {"0", "0", "1"}, "z");
    CHECK(code_of([&] { (void)classify_tangency(D, {0.0, 0.0, 0.0}); }) == ErrorCode::DegenerateTangency);
}

TEST_CASE("pseudo-equilibria") {
    const ParamMap p{{"a", 0.1}, {"b", 1.0}};
    const FilippovSystem Z = system_of({"a*x - b*y", "b*x + a*y", "x - 1"}, {"0", "0", "1"}, "z", p);
    const PseudoEquilibrium e = find_pseudo_equilibrium(Z, {0.05, -0.03, 0.0});
    CHECK(norm(e.point) < 1e-10);
    CHECK(e.kind == PseudoKind::PseudoSaddleFocus);
    CHECK(e.mu1.real() > 0.0);
    CHECK(std::abs(e.mu1.imag()) > 0.5);

    const FilippovSystem N = system_of({"2*x", "y", "x - 1"}, {"0", "0", "1"}, "z");
    const PseudoEquilibrium n = find_pseudo_equilibrium(N, {0.05, 0.02, 0.0});
    CHECK(n.kind == PseudoKind::PseudoNode);

    const FilippovSystem F = system_of({"1", "0", "x - 1"}, {"0", "0", "1"}, "z");
    CHECK(code_of([&] { (void)find_pseudo_equilibrium(F, {0.2, 0.0, 0.0}); }) == ErrorCode::NoConvergence);
}

TEST_CASE("flow to manifold") {
    IntegratorOptions opt;
    const auto g = parse_switching("z");
    const TrajectorySegment s = flow_to_manifold(parse_field({"0", "0", "-1"}), g, {0.0, 0.0, 1.0}, 10.0, opt);
    CHECK(s.terminal == Terminal::ManifoldHit);
    CHECK(s.duration() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(s.end()[2]) < 1e-12);

    // rotation in the plane plus constant descent: exp(tA) in closed form
    const TrajectorySegment r = flow_to_manifold(parse_field({"-y", "x", "-0.5"}), g, {1.0, 0.0, 1.3}, 10.0, opt);
    const double T = 2.6;
    CHECK(std::abs(r.duration() - T) < 1e-9);
    CHECK(std::abs(r.end()[0] - std::cos(T)) < 1e-9);
    CHECK(std::abs(r.end()[1] - std::sin(T)) < 1e-9);

    // departure from a point on M: the root at t = 0 is not reported
    const TrajectorySegment d = flow_to_manifold(parse_field({"1", "0", "-x"}), g, {-1.0, 0.0, 0.0}, 10.0, opt);
    CHECK(d.terminal == Terminal::ManifoldHit);
    CHECK(d.duration() == doctest::Approx(2.0).epsilon(1e-9));

    CHECK(code_of([&] { (void)flow_to_manifold(parse_field({"0", "0", "1"}), g, {0, 0, 1}, 1.0, opt); }) ==
          ErrorCode::NoHit);
}

TEST_CASE("sliding flow") {
    const ParamMap p{{"a", 0.1}, {"b", 1.0}};
    const FilippovSystem Z = system_of({"a*x - b*y", "b*x + a*y", "x - 1"}, {"0", "0", "1"}, "z", p);
    IntegratorOptions opt;
    SlidingStop stop;
    stop.kind = SlidingStop::Kind::Time;
    stop.t_max = 20.0;
    const TrajectorySegment back = flow_sliding(Z, {0.1, 0.0, 0.0}, stop, Direction::Backward, opt);
    CHECK(norm(back.end()) < 0.1 * 0.5);
    for (std::size_t i = 1; i < back.u.size(); ++i) CHECK(norm(back.u[i]) < norm(back.u[i - 1]));
    for (const Vec3& u : back.u) CHECK(std::abs(u[2]) <= Z.tol.manifold);

    SlidingStop fold;
    const TrajectorySegment fwd = flow_sliding(Z, {0.01, 0.0, 0.0}, fold, Direction::Forward, opt);
    CHECK(fwd.terminal == Terminal::FoldHit);
    CHECK(std::abs(fwd.end()[0] - 1.0) < 1e-9);

    stop.t_max = 3.0;
    const TrajectorySegment there = flow_sliding(Z, {0.2, 0.1, 0.0}, stop, Direction::Forward, opt);
    const TrajectorySegment home = flow_sliding(Z, there.end(), stop, Direction::Backward, opt);
    CHECK(norm(home.end() - Vec3{0.2, 0.1, 0.0}) < 1e-8);
}

TEST_CASE("trajectories concatenate") {
    IntegratorOptions opt;
    const FilippovSystem Z = make_ssc_bench(shoot_ssc_bench({}).params);
    const auto segs = filippov_trajectory(Z, {-0.3, 0.2, 0.05}, 3.0, EscapingPolicy::Error, opt);
    REQUIRE(segs.size() >= 2);
    CHECK(segs[0].mode == FlowMode::FlowX);
    CHECK(segs[1].mode == FlowMode::FlowSliding);

    const FilippovSystem C = system_of({"0", "0", "-1"}, {"0", "0", "-1"}, "z");
    const auto cross = filippov_trajectory(C, {0.0, 0.0, 1.0}, 2.0, EscapingPolicy::Error, opt);
    for (const auto& s : cross) CHECK(s.mode != FlowMode::FlowSliding);
    CHECK(cross.back().end()[2] == doctest::Approx(-1.0));

    // escaping start: error by default, a policy picks a branch
    const FilippovSystem E = system_of({"0", "0", "1"}, {"0", "0", "-1"}, "z");
    CHECK(code_of([&] { (void)filippov_trajectory(E, {0, 0, 0}, 1.0, EscapingPolicy::Error, opt); }) ==
          ErrorCode::NonUniqueForward);
    const auto up = filippov_trajectory(E, {0, 0, 0}, 1.0, EscapingPolicy::FollowX, opt);
    CHECK(up.back().end()[2] == doctest::Approx(1.0));
}

}
