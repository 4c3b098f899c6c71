#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssc/errors.hpp"
#include "ssc_app/commands.hpp"
#include "ssc_app/config.hpp"

namespace {

struct ModelFlags {
    std::optional<std::string> kind;
    std::optional<double> lambda, a, c;
    std::optional<int> i_min, i_max, k;

    [[nodiscard]] bool any() const { return kind || lambda || a || c || i_min || i_max || k; }

    void apply(ssc::app::RunConfig& cfg) const {
        if (!any()) return;
        ssc::app::ModelConfig m = cfg.model.value_or(ssc::app::ModelConfig{});
        if (kind) m.kind = *kind;
        if (lambda) m.lambda = *lambda;
        if (a) m.a = *a;
        if (c) m.c = *c;
        if (i_min) m.i_min = *i_min;
        if (i_max) m.i_max = *i_max;
        if (k) m.k = *k;
        cfg.model = m;
        cfg.system.reset();
    }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, const std::string& kind_flag) {
    cmd->add_option(kind_flag, f.kind, "Analytic model")->check(CLI::IsMember({"geometric", "middle-thirds", "equal-ratio"}));
    cmd->add_option("--lambda", f.lambda, "Geometric model contraction base");
    cmd->add_option("--a", f.a, "Geometric model slope");
    cmd->add_option("--i-min", f.i_min, "Geometric model first index");
    cmd->add_option("--i-max", f.i_max, "Geometric model last index");
    cmd->add_option("--k", f.k, "Equal-ratio map count");
    cmd->add_option("--c", f.c, "Equal-ratio contraction");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sliding Shilnikov connections: classification, return maps and attractor dimension"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    ssc::app::Overrides ov;
    std::optional<std::string> out;
    app.add_option("--config", config_path, "Run configuration (JSON)");
    app.add_option("--out", out, "Output directory");
    app.add_option("--seed", ov.seed, "Random seed");
    app.add_option("--tol-event", ov.tol_event, "Event location tolerance");
    app.add_option("--radius", ov.radius, "Fold segment radius r");
    app.add_option("--imax", ov.i_max, "Largest branch index");
    app.add_option("--depth", ov.depth, "Cover depth");
    app.add_option("--policy", ov.policy, "Escaping region policy")->check(CLI::IsMember({"x", "y", "slide"}));

    ssc::app::ClassifyOptions copt;
    auto* classify = app.add_subcommand("classify", "Classify the switching manifold on a grid");
    classify->add_option("--grid", copt.grid, "Grid points per axis");

    ssc::app::SimulateOptions sopt;
    std::vector<double> u0;
    auto* simulate = app.add_subcommand("simulate", "Integrate one Filippov trajectory");
    simulate->add_option("--u0", u0, "Initial point x y z (default: q_seed)")->expected(3);
    simulate->add_option("--time", sopt.T, "Integration time");

    auto* return_map = app.add_subcommand("return-map", "Certify the connection and enumerate branches");

    ModelFlags dflags, aflags, mflags;
    auto* dimension = app.add_subcommand("dimension", "Dimension bounds, covers and oracle verdict");
    add_model_flags(dimension, dflags, "--model");
    auto* attractor = app.add_subcommand("attractor", "Attractor covers, scaffold and Cantor certificate");
    add_model_flags(attractor, aflags, "--model");
    auto* model = app.add_subcommand("model", "Dimension pipeline on an analytic model");
    add_model_flags(model, mflags, "--kind");

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ssc::app::kExitConfig;
    }

    try {
        ssc::app::RunConfig cfg = config_path ? ssc::app::load_config(*config_path) : ssc::app::RunConfig{};
        if (out) ov.out = *out;
        ssc::app::apply(cfg, ov);
        if (*dimension) dflags.apply(cfg);
        if (*attractor) aflags.apply(cfg);
        if (*model) mflags.apply(cfg);

        if (*model) {
            if (!cfg.model) cfg.model = ssc::app::ModelConfig{};
            return ssc::app::cmd_model(cfg);
        }
        if (!cfg.system && !cfg.model)
            throw ssc::Error(ssc::ErrorCode::ConfigError, "--config: required for this command");
        if (*classify) return ssc::app::cmd_classify(cfg, copt);
        if (*simulate) {
            if (!u0.empty()) sopt.u0 = ssc::Vec3{u0[0], u0[1], u0[2]};
            return ssc::app::cmd_simulate(cfg, sopt);
        }
        if (*return_map) return ssc::app::cmd_return_map(cfg);
        if (*dimension) return ssc::app::cmd_dimension(cfg);
        if (*attractor) return ssc::app::cmd_attractor(cfg);
    } catch (const std::exception& e) {
        std::cerr << "ssc: " << e.what() << "\n";
        return ssc::app::exit_code(e);
    }
    return ssc::app::kExitOk;
}
