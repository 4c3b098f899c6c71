#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ssc/bench.hpp"
#include "ssc/errors.hpp"
#include "ssc/returnmap.hpp"

using namespace ssc;

namespace {

const Vec3 kP{0.01, 0.01, 0.0};
const Vec3 kQ{1.0, 0.001, 0.0};

struct Fixture {
    ReturnMapContext ctx;
    BranchScan scan;
};

// One small scan shared by the cases below.
const Fixture& fixture() {
    static const Fixture f = [] {
        ReturnMapOptions o;
        o.scan_points = 2000;
        Fixture x{make_return_map(make_ssc_bench(shoot_ssc_bench({}).params), kP, kQ, 0.05, o), {}};
        x.scan = enumerate_branches(x.ctx, 4);
        return x;
    }();
    return f;
}

Branch synthetic(Side side, int index) {
    Branch J;
    J.side = side;
    J.index = index;
    J.winding = index - 1;
    J.image_lo = -1.0;
    J.image_hi = 1.0;
    return J;
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

TEST_SUITE("returnmap") {

TEST_CASE("connection certificate") {
    const ShilnikovCertificate& c = fixture().ctx.cert;
    CHECK(c.residual < 1e-9);
    CHECK(c.t_q > 0.0);
    CHECK(norm(c.p) < 1e-10);
    CHECK(c.lambda_hat == doctest::Approx(std::exp(2.0 * std::numbers::pi * 0.1)).epsilon(1e-6));
    for (std::size_t i = 1; i < c.backward_decay.size(); ++i) CHECK(c.backward_decay[i] < c.backward_decay[i - 1]);
}

TEST_CASE("connection failures") {
    SscBenchParams p = shoot_ssc_bench({}).params;
    p.u1 += 0.1;
    CHECK(code_of([&] { (void)verify_connection(make_ssc_bench(p), kP, kQ); }) ==
          ErrorCode::ConnectionResidualTooLarge);

    FilippovSystem S;
    S.X = parse_field({"a*x - b*y", "b*x + a*y", "x - 1"}, {{"a", -0.1}, {"b", 1.0}});
    S.Y = parse_field({"0", "0", "1"});
    S.g = parse_switching("z");
    CHECK(code_of([&] { (void)verify_connection(S, kP, kQ); }) == ErrorCode::NotAFocus);
}

TEST_CASE("fold segment is the line x = 1") {
    const FoldSegment& f = fixture().ctx.fold;
    for (const Vec3& u : f.nodes) {
        CHECK(std::abs(u[0] - 1.0) < 1e-10);
        CHECK(std::abs(u[2]) < 1e-10);
        CHECK(std::abs(u[1]) <= 0.05 + 1e-9);
    }
    for (std::size_t i = 1; i < f.s.size(); ++i) CHECK(f.s[i] > f.s[i - 1]);
    CHECK(std::abs(f.chart(f.q)) < 1e-12);
    const Vec3 end = f.point(fixture().ctx.Z, 1.0);
    CHECK(std::abs(std::abs(end[1] - f.q[1]) - 0.05) < 1e-9);
}

TEST_CASE("theta and the first return") {
    const ReturnMapContext& ctx = fixture().ctx;
    CHECK(norm(theta_X(ctx, 0.0).point - ctx.cert.p) < 1e-8);
    CHECK(code_of([&] { (void)first_return(ctx, 0.0); }) == ErrorCode::SectionMiss);
    CHECK_THROWS_AS((void)theta_X(ctx, 1.5), Error);

    // theta is monotone along a grid of one side
    double prev = -1.0;
    for (int k = 1; k <= 8; ++k) {
        const Vec3 u = theta_X(ctx, 0.05 * k).point;
        const double d = norm(u - ctx.cert.p);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("branches") {
    const auto& B = fixture().scan.branches;
    REQUIRE(B.size() == 8);
    auto sorted = B;
    std::sort(sorted.begin(), sorted.end(), [](const Branch& a, const Branch& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < sorted.size(); ++i) CHECK(sorted[i - 1].hi < sorted[i].lo);
    for (const Branch& J : B) {
        CHECK(J.winding == J.index - 1);
        CHECK(0.0 < J.deriv_lo);
        CHECK(J.deriv_lo <= J.deriv_hi);
        CHECK(J.deriv_hi < 1.0);
        CHECK(J.surjective(1e-6));
        for (const Branch& K : B)
            if (K.side == J.side && K.index == J.index + 1) CHECK(std::max(std::abs(K.lo), std::abs(K.hi)) < std::min(std::abs(J.lo), std::abs(J.hi)));
    }
    // the first return off a branch endpoint hits an end of the segment
    const Branch& J = B.front();
    CHECK(std::abs(std::abs(first_return(fixture().ctx, J.lo).value) - 1.0) < 1e-6);
}

TEST_CASE("inverse branches") {
    const ReturnMapContext& ctx = fixture().ctx;
    for (const Branch& J : fixture().scan.branches) {
        const double mid = 0.5 * (J.lo + J.hi);
        const double x = first_return(ctx, mid).value;
        CHECK(std::abs(branch_inverse(ctx, J, x) - mid) < 1e-10);
        for (int k = 0; k <= 4; ++k) {
            const double y = -0.9 + 0.45 * k;
            const double w = surrogate_inverse(J, y);
            CHECK(std::abs(first_return(ctx, w).value - y) < 1e-9);
            const double w2 = surrogate_inverse(J, y + 0.1);
            CHECK(std::abs(w2 - w) <= J.deriv_hi * 0.1 * (1 + 1e-9));
        }
    }
    CHECK(code_of([&] { (void)branch_inverse(ctx, fixture().scan.branches.front(), 1.5); }) ==
          ErrorCode::NotSurjective);

    // psi_J1 o psi_J2 lands in J1
    const Branch& J1 = fixture().scan.branches[0];
    const Branch& J2 = fixture().scan.branches[5];
    const double w = surrogate_inverse(J1, surrogate_inverse(J2, 0.3));
    CHECK((w >= J1.lo && w <= J1.hi));
}

TEST_CASE("cutoff selection") {
    std::vector<Branch> B;
    for (int i = 1; i <= 12; ++i) {
        B.push_back(synthetic(Side::L, i));
        B.push_back(synthetic(Side::R, i));
    }
    const double lam = std::exp(2.0 * std::numbers::pi * 0.1);
    int expect = 1;
    while (2.0 * std::pow(lam, -(expect - 1)) / (1.0 - 1.0 / lam) >= 1.0) ++expect;
    CHECK(select_U(B, lam, 1.0) == expect);
    CHECK(select_U(B, lam, 2.0 * lam / (lam - 1.0) * 1.0001) == 1);
    CHECK(code_of([&] { (void)select_U(B, 1.0, 1.0); }) == ErrorCode::NoValidCutoff);
    CHECK(code_of([&] { (void)select_U(B, 0.8, 1.0); }) == ErrorCode::NoValidCutoff);

    // a non-surjective branch pushes the cutoff past it
    B[2 * 5].image_hi = 0.5;
    CHECK(select_U(B, lam, 100.0) == 7);
}

TEST_CASE("noise floor truncation") {
    const double lam = 1.874456;
    CHECK(default_imax(lam, 0.05, 1e-5) == static_cast<int>(std::floor(std::log(0.05 / 1e-4) / std::log(lam))));
    CHECK(default_imax(lam, 0.05, 1e-15) == 14);
    CHECK(default_imax(0.9, 0.05, 1e-9) == 2);
    CHECK(code_of([] { cross_validate_lambda(1.87, 2.2, 0.10); }) == ErrorCode::LambdaMismatch);
    cross_validate_lambda(1.8745, 1.8746, 0.10);
}

}
