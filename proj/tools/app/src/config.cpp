#include "ssc_app/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ssc/errors.hpp"

namespace ssc::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::ConfigError, field + ": " + what);
}

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) fail(field, "expected an integer");
    return j.get<int>();
}

std::string string(const json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
}

Vec3 vec3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) fail(field, "expected an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = number(j[i], field + "[" + std::to_string(i) + "]");
    return v;
}

std::array<std::string, 3> field3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) fail(field, "expected an array of 3 expressions");
    std::array<std::string, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = string(j[i], field + "[" + std::to_string(i) + "]");
    return out;
}

double positive(const json& j, const std::string& field) {
    const double v = number(j, field);
    if (!(v > 0.0)) fail(field, "must be positive");
    return v;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
}

}  // namespace

EscapingPolicy parse_policy(const std::string& s) {
    if (s == "x") return EscapingPolicy::FollowX;
    if (s == "y") return EscapingPolicy::FollowY;
    if (s == "slide") return EscapingPolicy::FollowSliding;
    if (s == "error") return EscapingPolicy::Error;
    fail("policy", "expected one of x, y, slide");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // report line and column instead of the byte offset
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                                ": invalid JSON");
    }
    if (!j.is_object()) fail("<root>", "expected an object");
    check_keys(j, "", {"version", "system", "model", "connection", "analysis", "tolerances", "output", "seed", "policy"});
    const json* v = find(j, "version");
    if (!v) fail("version", "missing");
    if (integer(*v, "version") != 1) fail("version", "unsupported version " + v->dump());

    RunConfig cfg;
    if (const json* s = find(j, "system")) {
        if (!s->is_object()) fail("system", "expected an object");
        check_keys(*s, "system", {"X", "Y", "g", "params", "domain"});
        SystemConfig sc;
        for (const char* key : {"X", "Y", "g"})
            if (!find(*s, key)) fail(std::string("system.") + key, "missing");
        sc.X = field3(s->at("X"), "system.X");
        sc.Y = field3(s->at("Y"), "system.Y");
        sc.g = string(s->at("g"), "system.g");
        if (const json* p = find(*s, "params")) {
            if (!p->is_object()) fail("system.params", "expected an object");
            for (auto it = p->begin(); it != p->end(); ++it)
                sc.params[it.key()] = number(it.value(), "system.params." + it.key());
        }
        if (const json* d = find(*s, "domain")) {
            if (!d->is_object()) fail("system.domain", "expected an object");
            check_keys(*d, "system.domain", {"lo", "hi"});
            if (const json* lo = find(*d, "lo")) sc.domain.lo = vec3(*lo, "system.domain.lo");
            if (const json* hi = find(*d, "hi")) sc.domain.hi = vec3(*hi, "system.domain.hi");
            for (int i = 0; i < 3; ++i)
                if (!(sc.domain.lo[i] < sc.domain.hi[i])) fail("system.domain", "lo must be below hi");
        }
        cfg.system = sc;
    }
    if (const json* m = find(j, "model")) {
        if (!m->is_object()) fail("model", "expected an object");
        check_keys(*m, "model", {"kind", "a", "lambda", "i_min", "i_max", "k", "c", "K"});
        ModelConfig mc;
        if (const json* x = find(*m, "kind")) mc.kind = string(*x, "model.kind");
        if (mc.kind != "geometric" && mc.kind != "middle-thirds" && mc.kind != "equal-ratio")
            fail("model.kind", "expected geometric, middle-thirds or equal-ratio");
        if (const json* x = find(*m, "a")) mc.a = positive(*x, "model.a");
        if (const json* x = find(*m, "lambda")) mc.lambda = number(*x, "model.lambda");
        if (const json* x = find(*m, "i_min")) mc.i_min = integer(*x, "model.i_min");
        if (const json* x = find(*m, "i_max")) mc.i_max = integer(*x, "model.i_max");
        if (const json* x = find(*m, "k")) mc.k = integer(*x, "model.k");
        if (const json* x = find(*m, "c")) mc.c = positive(*x, "model.c");
        if (const json* x = find(*m, "K")) {
            if (!x->is_array() || x->size() != 2) fail("model.K", "expected [lo, hi]");
            mc.K_lo = number((*x)[0], "model.K[0]");
            mc.K_hi = number((*x)[1], "model.K[1]");
        }
        cfg.model = mc;
    }
    if (cfg.system && cfg.model) fail("model", "a config holds either system or model, not both");
    if (!cfg.system && !cfg.model) fail("system", "missing (or give a model)");

    if (const json* c = find(j, "connection")) {
        if (!c->is_object()) fail("connection", "expected an object");
        check_keys(*c, "connection", {"p_seed", "q_seed"});
        if (const json* p = find(*c, "p_seed")) cfg.p_seed = vec3(*p, "connection.p_seed");
        if (const json* q = find(*c, "q_seed")) cfg.q_seed = vec3(*q, "connection.q_seed");
    }
    if (const json* a = find(j, "analysis")) {
        if (!a->is_object()) fail("analysis", "expected an object");
        check_keys(*a, "analysis", {"r", "i_max", "depth", "decay_depth", "schedule", "box_window"});
        if (const json* x = find(*a, "r")) cfg.r = positive(*x, "analysis.r");
        if (const json* x = find(*a, "i_max")) cfg.i_max = integer(*x, "analysis.i_max");
        if (const json* x = find(*a, "depth")) cfg.depth = integer(*x, "analysis.depth");
        if (const json* x = find(*a, "decay_depth")) cfg.decay_depth = integer(*x, "analysis.decay_depth");
        if (const json* x = find(*a, "schedule")) {
            if (!x->is_array()) fail("analysis.schedule", "expected an array of integers");
            for (std::size_t i = 0; i < x->size(); ++i)
                cfg.schedule.push_back(integer((*x)[i], "analysis.schedule[" + std::to_string(i) + "]"));
        }
        if (const json* x = find(*a, "box_window")) {
            if (!x->is_array() || x->size() != 2) fail("analysis.box_window", "expected [lo, hi]");
            cfg.box_lo = positive((*x)[0], "analysis.box_window[0]");
            cfg.box_hi = positive((*x)[1], "analysis.box_window[1]");
            if (!(cfg.box_lo < cfg.box_hi)) fail("analysis.box_window", "lo must be below hi");
        }
    }
    if (const json* t = find(j, "tolerances")) {
        if (!t->is_object()) fail("tolerances", "expected an object");
        check_keys(*t, "tolerances", {"event", "manifold", "tangency"});
        if (const json* x = find(*t, "event")) cfg.tol_event = positive(*x, "tolerances.event");
        if (const json* x = find(*t, "manifold")) cfg.tol_manifold = positive(*x, "tolerances.manifold");
        if (const json* x = find(*t, "tangency")) cfg.tol_tangency = positive(*x, "tolerances.tangency");
    }
    if (const json* o = find(j, "output")) cfg.out = string(*o, "output");
    if (const json* s = find(j, "seed")) {
        if (!s->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const json* p = find(j, "policy")) cfg.policy = parse_policy(string(*p, "policy"));

    if (cfg.i_max < 0 || cfg.i_max == 1) fail("analysis.i_max", "must be 0 (default) or at least 2");
    if (cfg.depth < 1) fail("analysis.depth", "must be at least 1");
    if (cfg.decay_depth < 1) fail("analysis.decay_depth", "must be at least 1");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

void apply(RunConfig& cfg, const Overrides& o) {
    if (o.out) cfg.out = *o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.tol_event) {
        if (!(*o.tol_event > 0.0)) fail("--tol-event", "must be positive");
        cfg.tol_event = *o.tol_event;
    }
    if (o.radius) {
        if (!(*o.radius > 0.0)) fail("--radius", "must be positive");
        cfg.r = *o.radius;
    }
    if (o.i_max) {
        if (*o.i_max < 2) fail("--imax", "must be at least 2");
        cfg.i_max = *o.i_max;
    }
    if (o.depth) {
        if (*o.depth < 0) fail("--depth", "must be nonnegative");
        cfg.depth = *o.depth;
    }
    if (o.policy) cfg.policy = parse_policy(*o.policy);
}

FilippovSystem build_system(const RunConfig& cfg) {
    if (!cfg.system) throw Error(ErrorCode::ConfigError, "system: missing");
    const SystemConfig& s = *cfg.system;
    FilippovSystem Z;
    Z.X = parse_field(s.X, s.params);
    Z.Y = parse_field(s.Y, s.params);
    Z.g = parse_switching(s.g, s.params);
    Z.domain = s.domain;
    Z.tol.event = cfg.tol_event;
    Z.tol.manifold = cfg.tol_manifold;
    Z.tol.tangency = cfg.tol_tangency;
    return Z;
}

}  // namespace ssc::app
