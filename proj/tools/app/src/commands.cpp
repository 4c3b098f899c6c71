#include "ssc_app/commands.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "json.hpp"
#include "ssc/errors.hpp"
#include "ssc_app/output.hpp"

namespace ssc::app {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }

ordered_json to_json(const ShilnikovCertificate& c, double lambda_decay) {
    ordered_json j;
    j["p"] = vec(c.p);
    j["q"] = vec(c.q);
    j["t_q"] = c.t_q;
    j["residual"] = c.residual;
    j["mu"] = ordered_json::array({c.mu.real(), c.mu.imag()});
    j["lambda_eigen"] = c.lambda_hat;
    j["lambda_decay"] = lambda_decay;
    j["decay_samples"] = c.backward_decay.size();
    return j;
}

ordered_json to_json(const ConditionReport& r) {
    ordered_json j = ordered_json::array();
    for (const auto& c : r.conditions) j.push_back({{"id", c.id}, {"passed", c.passed}, {"detail", c.detail}});
    return j;
}

ordered_json to_json(const DimensionReport& d) {
    ordered_json j;
    j["moran_lower"] = d.moran_lower;
    j["moran_upper"] = d.moran_upper;
    j["moran_upper_listed"] = d.moran_upper_listed;
    j["pressure_root"] = d.pressure_root ? ordered_json(*d.pressure_root) : ordered_json(nullptr);
    ordered_json sched = ordered_json::array();
    for (const auto& t : d.truncation_schedule) sched.push_back({{"size", t.size}, {"lower", t.lower}});
    j["truncation_schedule"] = sched;
    j["capped"] = d.capped;
    j["note"] = d.note;
    return j;
}

ordered_json to_json(const CantorCertificate& c) {
    auto clause = [](const CantorClause& k) { return ordered_json{{"passed", k.passed}, {"detail", k.detail}}; };
    ordered_json j;
    j["depth"] = c.depth;
    j["passed"] = c.passed();
    j["length"] = clause(c.length);
    j["perfect"] = clause(c.perfect);
    j["separated"] = clause(c.separated);
    j["closure"] = clause(c.closure);
    j["total_lengths"] = c.total_lengths;
    j["decay_factor"] = c.decay_factor;
    j["max_ratio"] = c.max_ratio;
    j["min_gap_ratio"] = c.min_gap_ratio;
    j["scaffold_points"] = c.scaffold_points;
    return j;
}

ordered_json to_json(const PointSample& s, const BoxCountResult& b, const Verdict& v) {
    ordered_json j;
    j["sample"] = {{"provenance", to_string(s.provenance)}, {"points", s.points.size()}, {"depth", s.depth},
                   {"overflow", s.overflow}};
    ordered_json scales = ordered_json::array();
    for (std::size_t i = 0; i < b.eps.size(); ++i) scales.push_back({{"eps", b.eps[i]}, {"count", b.counts[i]}});
    j["box"] = {{"slope", b.slope}, {"r2", b.r2}, {"scales", scales}};
    j["band"] = ordered_json::array({v.band_lo, v.band_hi});
    j["margins"] = ordered_json::array({v.margin_lo, v.margin_hi});
    j["sum_c"] = v.sum_c;
    j["max_cover_decay"] = v.max_decay;
    j["failures"] = v.failures;
    j["verdict"] = v.passed ? "PASS" : "FAIL";
    return j;
}

ordered_json to_json(const PositiveWitness& w, const IfsSystem& sys) {
    return {{"maps", ordered_json::array({sys.maps[w.first].tag, sys.maps[w.second].tag})},
            {"b", w.b},
            {"lower_bound", w.bound},
            {"capped", w.capped}};
}

ordered_json maps_json(const IfsSystem& sys) {
    ordered_json j = ordered_json::array();
    for (const auto& f : sys.maps)
        j.push_back({{"tag", f.tag}, {"lo", f.image.lo}, {"hi", f.image.hi}, {"b", f.b}, {"c", f.c}});
    return j;
}

std::string covers_csv(const CoverSequence& seq) {
    Csv csv({"lo", "hi", "level", "mid", "half"});
    for (const CoverSet& C : seq.levels)
        for (std::size_t i = 0; i < C.size(); ++i) {
            csv.cell(C.lo(i)).cell(C.hi(i)).cell(static_cast<long long>(C.level)).cell(C.mid[i]).cell(C.half[i]);
            csv.end_row();
        }
    return csv.str();
}

std::string scaffold_csv(const Scaffold& s) {
    Csv csv({"coordinate", "word_length"});
    for (const auto& p : s.points) {
        csv.cell(p.x).cell(static_cast<long long>(p.length));
        csv.end_row();
    }
    return csv.str();
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void require_connection(const RunConfig& cfg) {
    if (!cfg.p_seed) throw Error(ErrorCode::ConfigError, "connection.p_seed: missing");
    if (!cfg.q_seed) throw Error(ErrorCode::ConfigError, "connection.q_seed: missing");
}

}  // namespace

int exit_code(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->code()) {
            case ErrorCode::ConfigError:
            case ErrorCode::SyntaxError:
            case ErrorCode::UnknownIdentifier:
                return kExitConfig;
            default:
                return kExitDynamics;
        }
    }
    return kExitDynamics;
}

IfsSystem build_model(const ModelConfig& m) {
    if (m.kind == "geometric") return make_geometric_model(m.a, m.lambda, m.i_min, m.i_max);
    if (m.kind == "middle-thirds") return make_middle_thirds({m.K_lo, m.K_hi});
    if (m.kind == "equal-ratio") return make_equal_ratio(m.k, m.c, {m.K_lo, m.K_hi});
    throw Error(ErrorCode::ConfigError, "model.kind: unknown kind " + m.kind);
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
    PipelineOptions o;
    o.r = cfg.r;
    o.i_max = cfg.i_max;
    o.cover_depth = cfg.depth;
    o.decay_depth = cfg.decay_depth;
    o.schedule = cfg.schedule;
    o.box.window_lo = cfg.box_lo;
    o.box.window_hi = cfg.box_hi;
    return o;
}

int cmd_classify(const RunConfig& cfg, const ClassifyOptions& opt) {
    const FilippovSystem Z = build_system(cfg);
    if (opt.grid < 2) throw Error(ErrorCode::ConfigError, "--grid: must be at least 2");
    const Box& D = Z.domain;
    const double z0 = 0.5 * (D.lo[2] + D.hi[2]);
    Csv csv({"x", "y", "label", "Xg", "Yg"});
    std::map<std::string, long long> counts;
    for (int i = 0; i < opt.grid; ++i) {
        for (int j = 0; j < opt.grid; ++j) {
            const double x = D.lo[0] + (D.hi[0] - D.lo[0]) * i / (opt.grid - 1);
            const double y = D.lo[1] + (D.hi[1] - D.lo[1]) * j / (opt.grid - 1);
            const Vec3 u = project_to_manifold(Z.g, {x, y, z0}, 8);
            if (!(std::abs(Z.g(u)) <= Z.tol.manifold) || !D.contains(u)) continue;
            const RegionInfo info = classify_region(Z, u);
            csv.cell(x).cell(y).cell(std::string(to_string(info.label))).cell(info.Xg).cell(info.Yg);
            csv.end_row();
            ++counts[to_string(info.label)];
        }
    }
    ordered_json rep;
    rep["command"] = "classify";
    rep["grid"] = opt.grid;
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : counts) c[k] = v;
    rep["counts"] = c;
    write_atomic(cfg.out / "classify.csv", csv.str());
    write_atomic(cfg.out / "classify.json", dump(rep));
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const SimulateOptions& opt) {
    const FilippovSystem Z = build_system(cfg);
    const Vec3 u0 = opt.u0 ? *opt.u0 : (cfg.q_seed ? *cfg.q_seed : throw Error(ErrorCode::ConfigError, "--u0: missing"));
    if (!(opt.T > 0.0)) throw Error(ErrorCode::ConfigError, "--time: must be positive");
    IntegratorOptions io;
    io.tol_event = cfg.tol_event;
    const auto segs = filippov_trajectory(Z, u0, opt.T, cfg.policy, io);
    Csv csv({"t", "x", "y", "z", "mode"});
    ordered_json list = ordered_json::array();
    double t0 = 0.0;
    for (const auto& s : segs) {
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            csv.cell(t0 + (s.t[i] - s.t.front())).cell(s.u[i][0]).cell(s.u[i][1]).cell(s.u[i][2]);
            csv.cell(std::string(to_string(s.mode)));
            csv.end_row();
        }
        list.push_back({{"mode", to_string(s.mode)}, {"start", t0}, {"duration", s.duration()},
                        {"terminal", to_string(s.terminal)}});
        t0 += s.duration();
    }
    ordered_json rep;
    rep["command"] = "simulate";
    rep["u0"] = vec(u0);
    rep["T"] = opt.T;
    rep["segments"] = list;
    write_atomic(cfg.out / "trajectory.csv", csv.str());
    write_atomic(cfg.out / "simulate.json", dump(rep));
    return kExitOk;
}

int cmd_return_map(const RunConfig& cfg) {
    require_connection(cfg);
    const FilippovSystem Z = build_system(cfg);
    const PipelineOptions po = pipeline_options(cfg);
    const ReturnMapContext ctx = make_return_map(Z, *cfg.p_seed, *cfg.q_seed, cfg.r, po.returnmap);
    const int i_max = cfg.i_max > 0 ? cfg.i_max : default_imax(ctx.cert.lambda_hat, cfg.r, ctx.cert.residual);
    const BranchScan scan = enumerate_branches(ctx, i_max);
    const double A = estimate_A(scan.branches, ctx.cert.lambda_hat);

    Csv csv({"side", "index", "lo", "hi", "image_lo", "image_hi", "deriv_lo", "deriv_hi", "increasing", "turns",
             "surrogate_error"});
    for (const Branch& J : scan.branches) {
        csv.cell(std::string(to_string(J.side))).cell(static_cast<long long>(J.index)).cell(J.lo).cell(J.hi);
        csv.cell(J.image_lo).cell(J.image_hi).cell(J.deriv_lo).cell(J.deriv_hi);
        csv.cell(static_cast<long long>(J.increasing)).cell(J.turns).cell(J.surrogate_error);
        csv.end_row();
    }
    ordered_json rep;
    rep["command"] = "return-map";
    const double period = 2.0 * std::numbers::pi / std::abs(ctx.cert.mu.imag());
    rep["certificate"] = to_json(ctx.cert, std::exp(ctx.cert.decay_rate * period));
    rep["r"] = cfg.r;
    rep["i_max"] = i_max;
    rep["branches"] = scan.branches.size();
    rep["evaluations"] = scan.evaluations;
    rep["A"] = A;
    try {
        rep["i_min"] = select_U(scan.branches, ctx.cert.lambda_hat, A);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoValidCutoff) throw;
        rep["i_min"] = nullptr;
        rep["note"] = e.what();
    }
    write_atomic(cfg.out / "branches.csv", csv.str());
    write_atomic(cfg.out / "return_map.json", dump(rep));
    return kExitOk;
}

DimensionRun run_dimension(const RunConfig& cfg) {
    DimensionRun run;
    ordered_json rep;
    rep["version"] = 1;
    rep["command"] = "dimension";
    if (cfg.model) {
        const IfsSystem sys = build_model(*cfg.model);
        BoxCountOptions box;
        box.window_lo = cfg.box_lo;
        box.window_hi = cfg.box_hi;
        FixtureResult f = run_fixture(sys, cfg.depth, cfg.schedule, box);
        rep["model"] = cfg.model->kind;
        rep["maps"] = sys.maps.size();
        rep["conditions"] = to_json(f.conditions);
        rep["dimension"] = to_json(f.dimension);
        rep["covers"] = {{"depth", f.covers.levels.size()}, {"maps", f.cover_system.maps.size()},
                         {"overflow", f.covers.overflow}};
        rep["cantor"] = to_json(f.cantor);
        rep["oracle"] = to_json(f.sample, f.box, f.verdict);
        run.passed = f.verdict.passed;
        write_atomic(cfg.out / "covers.csv", covers_csv(f.covers));
        run.fixture = std::move(f);
    } else {
        require_connection(cfg);
        const FilippovSystem Z = build_system(cfg);
        PipelineResult p = run_pipeline(Z, *cfg.p_seed, *cfg.q_seed, pipeline_options(cfg));
        rep["certificate"] = to_json(p.ctx.cert, p.lambda_decay);
        rep["branches"] = {{"i_max", p.i_max},
                           {"i_min", p.i_min},
                           {"A", p.A},
                           {"lambda_branches", p.lambda_branches},
                           {"maps", maps_json(p.system)}};
        rep["conditions"] = to_json(p.conditions);
        ordered_json dim = to_json(p.dimension);
        dim["positive"] = to_json(p.positive, p.system);
        rep["dimension"] = dim;
        rep["covers"] = {{"cantor_depth", p.cantor_covers.levels.size()},
                         {"cantor_maps", p.cantor_system.maps.size()},
                         {"decay_depth", p.decay_covers.levels.size()},
                         {"decay_maps", p.decay_system.maps.size()}};
        rep["cantor"] = to_json(p.cantor);
        rep["oracle"] = to_json(p.sample, p.box, p.verdict);
        run.passed = p.verdict.passed;
        write_atomic(cfg.out / "covers.csv", covers_csv(p.decay_covers));
        run.pipeline = std::move(p);
    }
    rep["verdict"] = run.passed ? "PASS" : "FAIL";
    run.report = dump(rep);
    write_atomic(cfg.out / "report.json", run.report);
    return run;
}

int cmd_dimension(const RunConfig& cfg) { return run_dimension(cfg).passed ? kExitOk : kExitFail; }

int cmd_model(const RunConfig& cfg) {
    if (!cfg.model) throw Error(ErrorCode::ConfigError, "model: missing");
    return cmd_dimension(cfg);
}

int cmd_attractor(const RunConfig& cfg) {
    CoverSequence covers;
    Scaffold scaffold;
    CantorCertificate cert;
    std::size_t maps = 0;
    if (cfg.model) {
        const IfsSystem sys = build_model(*cfg.model);
        const IfsSystem sub = cover_subsystem(sys, std::max(cfg.depth, 1));
        covers = attractor_levels(sub, cfg.depth);
        scaffold = closure_scaffold(sub, 0.0, cfg.depth);
        if (cfg.depth >= 1) cert = cantor_assess(sub, covers, scaffold, 0.0, &sys);
        maps = sub.maps.size();
    } else {
        require_connection(cfg);
        const FilippovSystem Z = build_system(cfg);
        const PipelineOptions po = pipeline_options(cfg);
        const ReturnMapContext ctx = make_return_map(Z, *cfg.p_seed, *cfg.q_seed, cfg.r, po.returnmap);
        const int i_max = cfg.i_max > 0 ? cfg.i_max : default_imax(ctx.cert.lambda_hat, cfg.r, ctx.cert.residual);
        const BranchScan scan = enumerate_branches(ctx, i_max);
        const double A = estimate_A(scan.branches, ctx.cert.lambda_hat);
        const int i_min = select_U(scan.branches, ctx.cert.lambda_hat, A);
        const IfsSystem sys = branch_system(scan.branches, i_min, {A, ctx.cert.lambda_hat, i_max});
        const IfsSystem sub = cover_subsystem(sys, std::max(cfg.depth, 1));
        covers = attractor_levels(sub, cfg.depth);
        scaffold = closure_scaffold(sub, 0.0, cfg.depth);
        if (cfg.depth >= 1) cert = cantor_assess(sub, covers, scaffold, 0.0, &sys);
        maps = sub.maps.size();
    }
    ordered_json rep = to_json(cert);
    rep["assessed"] = cfg.depth >= 1;
    rep["maps"] = maps;
    rep["overflow"] = covers.overflow || scaffold.overflow;
    write_atomic(cfg.out / "attractor_covers.csv", covers_csv(covers));
    write_atomic(cfg.out / "scaffold.csv", scaffold_csv(scaffold));
    write_atomic(cfg.out / "certificate.json", dump(rep));
    if (cfg.depth < 1) return kExitOk;
    return cert.passed() ? kExitOk : kExitFail;
}

}  // namespace ssc::app
