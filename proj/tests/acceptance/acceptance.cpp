// One line per acceptance criterion. Usage: ssc_acceptance <ssc executable> <data dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ssc/cifs.hpp"
#include "ssc/errors.hpp"
#include "ssc/oracle.hpp"
#include "ssc/pipeline.hpp"
#include "ssc_app/commands.hpp"
#include "ssc_app/config.hpp"

namespace fs = std::filesystem;
using namespace ssc;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            passed = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) {
        if (passed) detail += (detail.empty() ? "" : "; ") + what;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.passed = false;
        o.detail = std::string("exception: ") + e.what();
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %d %s (%.1fs): %s\n", o.passed ? "PASS" : "FAIL", id, name, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double sum_c(const IfsSystem& sys) {
    double s = 0.0;
    for (const auto& f : sys.maps) s += f.c;
    return s;
}

// every scaffold point of word length L lies in the level-j cover for j <= L
std::size_t scaffold_misses(const Scaffold& s, const CoverSequence& covers) {
    std::size_t miss = 0;
    for (const auto& p : s.points) {
        const int top = std::min<int>(p.length, static_cast<int>(covers.levels.size()));
        for (int j = 1; j <= top; ++j) {
            const double slack = 1e-14 + 64 * std::numeric_limits<double>::epsilon() * std::abs(p.x);
            if (!covers.levels[j - 1].find(p.x, slack)) ++miss;
        }
    }
    return miss;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <ssc executable> <data dir>\n", argv[0]);
        return 2;
    }
    const fs::path ssc_exe = argv[1];
    const fs::path data = argv[2];
    const fs::path work = fs::temp_directory_path() / "ssc_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    const double ln3_ln4 = std::log(3.0) / std::log(4.0);

    report(1, "Moran closed forms", [] {
        Outcome o;
        const auto t0 = Clock::now();
        double worst = 0.0;
        for (auto [k, c] : {std::pair{2, 1.0 / 3.0}, {3, 0.25}, {5, 0.2}}) {
            const double t = moran_bounds(make_equal_ratio(k, c)).t;
            worst = std::max(worst, std::abs(t - std::log(k) / std::log(1.0 / c)));
        }
        const double single = moran_bounds(make_equal_ratio(1, 0.5)).t;
        const double dt = seconds_since(t0);
        o.require(worst < 1e-10, fmt("error %.2e", worst));
        o.require(single == 0.0, fmt("single map gives %.3g", single));
        o.require(dt < 1.0, fmt("runtime %.2fs", dt));
        o.note(fmt("max error %.2e, single map %g", worst, single));
        return o;
    });

    report(2, "pressure closed form", [&] {
        Outcome o;
        const auto t0 = Clock::now();
        const IfsSystem g = make_geometric_model(1.0, 4.0, 1, 40);
        const double t = pressure_root(g);
        std::vector<int> schedule(40);
        std::iota(schedule.begin(), schedule.end(), 1);
        const auto curve = dimension_sup(g, schedule);
        const double dt = seconds_since(t0);
        bool monotone = true;
        for (std::size_t i = 1; i < curve.size(); ++i) monotone = monotone && curve[i].lower >= curve[i - 1].lower;
        const double gap = std::abs(curve.back().lower - t);
        o.require(std::abs(t - ln3_ln4) < 1e-10, fmt("t~ = %.12f", t));
        o.require(monotone, "truncation curve not monotone");
        o.require(gap < 1e-4, fmt("truncation gap %.2e", gap));
        o.require(dt < 5.0, fmt("runtime %.2fs", dt));
        o.note(fmt("t~ - ln3/ln4 = %.1e, truncation gap %.1e", t - ln3_ln4, gap));
        return o;
    });

    // the SSC-bench dimension run feeds criteria 3 through 7 and 9
    app::RunConfig cfg = app::load_config(data / "ssc_bench.json");
    cfg.out = work / "run_a";
    std::optional<app::DimensionRun> run;
    double run_seconds = 0.0;
    std::string run_error;
    {
        const auto t0 = Clock::now();
        try {
            run = app::run_dimension(cfg);
        } catch (const std::exception& e) {
            run_error = e.what();
        }
        run_seconds = seconds_since(t0);
    }
    auto need_run = [&]() -> const PipelineResult& {
        if (!run) throw std::runtime_error("dimension run failed: " + run_error);
        return *run->pipeline;
    };

    report(3, "dimension in (0,1) and cover decay", [&] {
        Outcome o;
        const PipelineResult& p = need_run();
        const DimensionReport& d = p.dimension;
        const double t = d.pressure_root.value_or(std::nan(""));
        o.require(0.0 < d.moran_lower, "moran_lower not positive");
        o.require(d.moran_lower <= t, fmt("moran_lower %.6f > t~ %.6f", d.moran_lower, t));
        o.require(t <= d.moran_upper + 1e-9, fmt("t~ %.6f > moran_upper %.6f", t, d.moran_upper));
        o.require(d.moran_upper < 1.0, fmt("moran_upper %.6f", d.moran_upper));
        const double bound = sum_c(p.decay_system);
        double worst = 0.0;
        const auto& L = p.decay_covers.levels;
        for (std::size_t k = 1; k < L.size(); ++k) worst = std::max(worst, cover_length(L[k]) / cover_length(L[k - 1]));
        worst = std::max(worst, cover_length(L.front()) / p.decay_system.K.length());
        o.require(L.size() == 8, fmt("%zu decay levels", L.size()));
        o.require(bound < 1.0, fmt("sum c = %.4f", bound));
        o.require(worst <= bound, fmt("decay %.4g above sum c %.4g", worst, bound));
        o.require(run_seconds < 300.0, fmt("runtime %.0fs", run_seconds));
        o.note(fmt("s=%.6f t~=%.6f t=%.6f; max decay %.4g <= sum c %.4g over %zu levels; pipeline %.0fs",
                   d.moran_lower, t, d.moran_upper, worst, bound, L.size(), run_seconds));
        return o;
    });

    report(4, "Cantor certificates", [&] {
        Outcome o;
        const PipelineResult& p = need_run();
        o.require(p.cantor.passed(), "SSC-bench certificate: " + p.cantor.length.detail + " / " +
                                         p.cantor.perfect.detail + " / " + p.cantor.separated.detail + " / " +
                                         p.cantor.closure.detail);
        o.require(p.cantor.depth >= 6, fmt("SSC-bench depth %d", p.cantor.depth));
        const std::size_t miss = scaffold_misses(p.scaffold, p.cantor_covers);
        o.require(miss == 0, fmt("SSC-bench: %zu scaffold points outside their covers", miss));
        std::string fixtures;
        for (auto [name, sys] : {std::pair{"geometric", make_geometric_model(1.0, 4.0, 1, 40)},
                                 std::pair{"middle-thirds", make_middle_thirds()}}) {
            const FixtureResult f = run_fixture(sys, 12);
            o.require(f.cantor.passed(), std::string(name) + " certificate failed");
            o.require(f.cantor.depth == 12, fmt("%s depth %d", name, f.cantor.depth));
            const std::size_t m = scaffold_misses(f.scaffold, f.covers);
            o.require(m == 0, fmt("%s: %zu scaffold misses", name, m));
            fixtures += fmt(", %s depth %d (%zu scaffold points)", name, f.cantor.depth, f.scaffold.points.size());
        }
        o.note(fmt("SSC-bench depth %d, %zu scaffold points", p.cantor.depth, p.scaffold.points.size()) + fixtures);
        return o;
    });

    report(5, "forward/backward equivalence", [&] {
        Outcome o;
        const PipelineResult& p = need_run();
        ForwardBackwardOptions fo;
        fo.samples = 10000;
        fo.seed = cfg.seed;
        const ForwardBackwardReport r = forward_backward_report(forward_map(p.ctx), p.system, 3, fo);
        o.require(r.decided >= 10000, fmt("only %d decided samples", r.decided));
        o.require(r.rate >= 0.999, fmt("agreement %.5f", r.rate));
        o.note(fmt("k=3, %d maps: %d/%d agree (rate %.5f), %d inside, %d excluded by collar", static_cast<int>(p.system.maps.size()),
                   r.agree, r.decided, r.rate, r.inside, r.excluded));
        return o;
    });

    report(6, "expansion and round trip", [&] {
        Outcome o;
        const PipelineResult& p = need_run();
        const auto& B = p.scan.branches;
        double s = 0.0;
        for (const Branch& J : B) s = std::max(s, J.deriv_hi);
        double min_ratio = INFINITY, worst_trip = 0.0;
        for (const Branch& J : B) {
            const double h = 1e-4 * J.width();
            for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                const double w = J.lo + f * J.width();
                const double d = std::abs(first_return(p.ctx, w + h).value - first_return(p.ctx, w - h).value) / (2 * h);
                min_ratio = std::min(min_ratio, d * s);
            }
            for (int k = 0; k < 20; ++k) {
                const double x = -1.0 + 2.0 * (k + 0.5) / 20.0;
                const double w = surrogate_inverse(J, x);
                worst_trip = std::max(worst_trip, std::abs(first_return(p.ctx, w).value - x));
            }
        }
        o.require(s < 1.0, fmt("s = %.4g", s));
        o.require(min_ratio >= 1.0, fmt("min |pi'| s = %.4g", min_ratio));
        o.require(worst_trip < 1e-9, fmt("round trip %.2e", worst_trip));
        o.note(fmt("%zu branches: s = %.4g, min |pi'|*s = %.4g, worst round trip %.2e", B.size(), s, min_ratio,
                   worst_trip));
        return o;
    });

    report(7, "branch geometry", [&] {
        Outcome o;
        const PipelineResult& p = need_run();
        const double lam = p.ctx.cert.lambda_hat;
        double worst = 0.0;
        int pairs = 0;
        for (const Branch& a : p.scan.branches) {
            if (a.index < 4) continue;
            for (const Branch& b : p.scan.branches) {
                if (b.side != a.side || b.index != a.index + 1) continue;
                worst = std::max(worst, std::abs(b.width() / a.width() * lam - 1.0));
                ++pairs;
            }
        }
        const double agree = std::abs(p.lambda_decay - lam) / lam;
        o.require(pairs > 0, "no consecutive pairs");
        o.require(worst <= 0.05, fmt("width ratio off by %.2f%%", 100 * worst));
        o.require(agree <= 0.10, fmt("eigen %.6f vs decay %.6f", lam, p.lambda_decay));
        o.note(fmt("%d pairs with index >= 4 within %.2f%% of 1/lambda; lambda eigen %.6f, decay %.6f, branches %.4f",
                   pairs, 100 * worst, lam, p.lambda_decay, p.lambda_branches));
        return o;
    });

    report(8, "oracle concordance", [] {
        Outcome o;
        std::string notes;
        for (auto [name, sys] : {std::pair{"geometric", make_geometric_model(1.0, 4.0, 1, 40)},
                                 std::pair{"middle-thirds", make_middle_thirds()}}) {
            const FixtureResult f = run_fixture(sys, 12);
            const Verdict& v = f.verdict;
            o.require(v.passed, std::string(name) + " verdict FAIL");
            notes += fmt("%s slope %.4f in [%.4f, %.4f]; ", name, v.box_slope, v.band_lo, v.band_hi);

            // negative control: understated contraction bounds
            IfsSystem corrupt = sys;
            for (auto& m : corrupt.maps) m.b = m.c = m.c / 2.0;
            corrupt.tail.reset();
            const Verdict w = crosscheck(dimension_report(corrupt, {}), f.box, f.covers, corrupt);
            o.require(!w.passed, std::string(name) + " corrupted bounds still PASS");
            notes += fmt("corrupted %s FAIL (margin %.3f); ", name, std::min(w.margin_lo, w.margin_hi));
        }
        o.note(notes.substr(0, notes.size() - 2));
        return o;
    });

    report(9, "determinism", [&] {
        Outcome o;
        need_run();
        const fs::path out_b = work / "run_b";
        const std::string cmd = "\"" + ssc_exe.string() + "\" dimension --config \"" +
                                (data / "ssc_bench.json").string() + "\" --out \"" + out_b.string() + "\" > \"" +
                                (work / "run_b.log").string() + "\" 2>&1";
        const int status = std::system(cmd.c_str());
        o.require(status == 0, fmt("ssc exited with status %d", status));
        for (const char* file : {"report.json", "covers.csv"}) {
            const std::string a = slurp(cfg.out / file), b = slurp(out_b / file);
            o.require(!a.empty() && a == b, std::string(file) + " differs");
        }
        o.note(fmt("report.json (%zu bytes) and covers.csv identical across two runs", slurp(cfg.out / "report.json").size()));
        return o;
    });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
