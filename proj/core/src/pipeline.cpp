#include "ssc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        std::string what = e.what();
        const std::string prefix = std::string(to_string(e.code())) + ": ";
        if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
        throw Error(e.code(), std::string(name) + ": " + what);
    }
}

std::vector<int> default_schedule(const IfsSystem& sys) {
    int lo = std::numeric_limits<int>::max(), hi = 0;
    for (const auto& f : sys.maps) {
        if (f.index <= 0) continue;
        lo = std::min(lo, f.index);
        hi = std::max(hi, f.index);
    }
    const int n = hi >= lo ? hi - lo + 1 : static_cast<int>(sys.maps.size());
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) s[i] = i + 1;
    return s;
}

}  // namespace

ContractionMap branch_map(const Branch& J) {
    auto sp = std::make_shared<const Branch>(J);
    ContractionMap f;
    f.eval = [sp](double x) { return surrogate_inverse(*sp, std::clamp(x, -1.0, 1.0)); };
    f.deriv = [sp](double x) {
        double d = 0.0;
        surrogate_inverse(*sp, std::clamp(x, -1.0, 1.0), &d);
        return d;
    };
    f.image = {J.lo, J.hi};
    f.b = J.deriv_lo;
    f.c = J.deriv_hi;
    f.increasing = J.increasing;
    f.noise = J.surrogate_error;
    f.tag = std::string(to_string(J.side)) + std::to_string(J.index);
    f.side = J.side == Side::L ? -1 : 1;
    f.index = J.index;
    return f;
}

IfsSystem branch_system(const std::vector<Branch>& branches, int i_min, const TailModel& tail) {
    IfsSystem sys;
    sys.K = {-1.0, 1.0};
    for (const Branch& J : branches)
        if (J.index >= i_min) sys.maps.push_back(branch_map(J));
    if (sys.maps.empty()) throw Error(ErrorCode::DegenerateSystem, "no branches at or above i_min");
    sys.tail = tail;
    return sys;
}

std::function<double(double)> forward_map(const ReturnMapContext& ctx) {
    return [&ctx](double w) {
        try {
            return first_return(ctx, w, Accuracy::Precise).value;
        } catch (const Error& e) {
            switch (e.code()) {
                case ErrorCode::SectionMiss:
                case ErrorCode::HitOutsideSliding:
                case ErrorCode::OutOfChart:
                    return std::numeric_limits<double>::quiet_NaN();
                default:
                    throw;
            }
        }
    };
}

PipelineResult run_pipeline(const FilippovSystem& Z, const Vec3& p_seed, const Vec3& q_seed,
                            const PipelineOptions& opt) {
    PipelineResult res;
    res.ctx = stage("certificate", [&] { return make_return_map(Z, p_seed, q_seed, opt.r, opt.returnmap); });
    const ShilnikovCertificate& cert = res.ctx.cert;
    const double period = 2.0 * std::numbers::pi / std::abs(cert.mu.imag());
    res.lambda_decay = std::exp(cert.decay_rate * period);
    stage("certificate", [&] { cross_validate_lambda(cert.lambda_hat, res.lambda_decay, opt.returnmap.lambda_tolerance); });

    res.i_max = opt.i_max > 0 ? opt.i_max : default_imax(cert.lambda_hat, opt.r, cert.residual);
    res.scan = stage("branches", [&] { return enumerate_branches(res.ctx, res.i_max); });
    res.lambda_branches = stage("branches", [&] { return lambda_from_branches(res.scan.branches, 1, res.i_max); });

    stage("select_U", [&] {
        res.A = estimate_A(res.scan.branches, cert.lambda_hat);
        res.i_min = select_U(res.scan.branches, cert.lambda_hat, res.A, opt.returnmap.surjectivity_tol);
    });
    std::vector<Branch> kept;
    for (const Branch& J : res.scan.branches)
        if (J.index >= res.i_min) kept.push_back(J);
    res.A = estimate_A(kept, cert.lambda_hat);
    res.system = stage("cifs", [&] { return branch_system(kept, res.i_min, {res.A, cert.lambda_hat, res.i_max}); });
    res.conditions = stage("cifs", [&] { return check_conditions(res.system); });

    const std::vector<int> schedule = opt.schedule.empty() ? default_schedule(res.system) : opt.schedule;
    stage("dimension", [&] {
        res.dimension = dimension_report(res.system, schedule);
        res.positive = dimension_positive(res.system);
    });

    stage("covers", [&] {
        res.cantor_system = cover_subsystem(res.system, opt.cover_depth, opt.budget);
        res.cantor_covers = attractor_levels(res.cantor_system, opt.cover_depth, opt.budget);
        res.scaffold = closure_scaffold(res.cantor_system, 0.0, opt.cover_depth - 1, opt.budget);
        res.cantor = cantor_assess(res.cantor_system, res.cantor_covers, res.scaffold, 0.0, &res.system);
        res.decay_system = cover_subsystem(res.system, opt.decay_depth, opt.budget);
        res.decay_covers = attractor_levels(res.decay_system, opt.decay_depth, opt.budget);
    });

    stage("oracle", [&] {
        const double resolution = opt.sample_resolution > 0.0 ? opt.sample_resolution : opt.box.window_lo / 3.0;
        res.sample = sample_word_images(res.system, resolution);
        res.box = box_counting(res.sample, opt.box);
        res.verdict = crosscheck(res.dimension, res.box, res.decay_covers, res.decay_system);
        if (!res.cantor.passed()) res.verdict.failures.push_back("Cantor certificate failed");
        if (!res.conditions.passed()) res.verdict.failures.push_back("CIFS conditions failed");
        res.verdict.passed = res.verdict.failures.empty();
    });
    return res;
}

FixtureResult run_fixture(const IfsSystem& sys, int depth, const std::vector<int>& schedule,
                          const BoxCountOptions& box, std::size_t budget) {
    FixtureResult res;
    res.conditions = stage("cifs", [&] { return check_conditions(sys); });
    res.dimension = stage("dimension", [&] {
        return dimension_report(sys, schedule.empty() ? default_schedule(sys) : schedule);
    });
    stage("covers", [&] {
        res.cover_system = cover_subsystem(sys, depth, budget);
        res.covers = attractor_levels(res.cover_system, depth, budget);
        res.scaffold = closure_scaffold(res.cover_system, 0.0, depth - 1, budget);
        res.cantor = cantor_assess(res.cover_system, res.covers, res.scaffold, 0.0, &sys);
    });
    stage("oracle", [&] {
        res.sample = sample_word_images(sys, box.window_lo / 3.0);
        res.box = box_counting(res.sample, box);
        res.verdict = crosscheck(res.dimension, res.box, res.covers, res.cover_system);
        if (!res.cantor.passed()) res.verdict.failures.push_back("Cantor certificate failed");
        res.verdict.passed = res.verdict.failures.empty();
    });
    return res;
}

}  // namespace ssc
