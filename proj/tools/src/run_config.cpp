#include "run_config.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace gzsl::cli {

using json = nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw UsageError("unknown config field '" + where + key + "'");
        }
    }
}

const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_num(const json& j, const std::string& key, double dflt, const std::string& where) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number()) throw UsageError("config field '" + where + key + "' must be a number");
    return v->get<double>();
}

std::size_t get_count(const json& j, const std::string& key, std::size_t dflt,
                      const std::string& where) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer() || v->get<double>() < 0) {
        throw UsageError("config field '" + where + key + "' must be a non-negative integer");
    }
    return v->get<std::size_t>();
}

std::uint64_t get_seed(const json& j, const std::string& key, std::uint64_t dflt,
                       const std::string& where) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
        throw UsageError("config field '" + where + key + "' must be a non-negative integer");
    }
    return v->get<std::uint64_t>();
}

bool get_bool(const json& j, const std::string& key, bool dflt, const std::string& where) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_boolean()) throw UsageError("config field '" + where + key + "' must be a bool");
    return v->get<bool>();
}

std::string get_str(const json& j, const std::string& key, const std::string& dflt,
                    const std::string& where) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_string()) throw UsageError("config field '" + where + key + "' must be a string");
    return v->get<std::string>();
}

cada::WarmupSchedule get_schedule(const json& j, const std::string& key,
                                  cada::WarmupSchedule dflt, const std::string& where) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_object()) {
        throw UsageError("config field '" + where + key + "' must be an object");
    }
    const std::string sub = where + key + ".";
    check_keys(*v, {"rate", "start_epoch", "end_epoch"}, sub);
    cada::WarmupSchedule s;
    s.rate = get_num(*v, "rate", dflt.rate, sub);
    s.start_epoch = static_cast<int>(get_num(*v, "start_epoch", dflt.start_epoch, sub));
    s.end_epoch = static_cast<int>(get_num(*v, "end_epoch", dflt.end_epoch, sub));
    return s;
}

data::SynthSpec parse_synth(const json& j, std::uint64_t run_seed, const std::string& where) {
    check_keys(j,
               {"n_seen", "n_unseen", "visual_dim", "semantic_dim", "samples_per_class",
                "cluster_spread", "semantic_noise", "seed"},
               where);
    data::SynthSpec s;
    s.n_seen = get_count(j, "n_seen", s.n_seen, where);
    s.n_unseen = get_count(j, "n_unseen", s.n_unseen, where);
    s.visual_dim = get_count(j, "visual_dim", s.visual_dim, where);
    s.semantic_dim = get_count(j, "semantic_dim", s.semantic_dim, where);
    s.samples_per_class = get_count(j, "samples_per_class", s.samples_per_class, where);
    s.cluster_spread = get_num(j, "cluster_spread", s.cluster_spread, where);
    s.semantic_noise = get_num(j, "semantic_noise", s.semantic_noise, where);
    s.seed = get_seed(j, "seed", run_seed, where);
    return s;
}

cada::CadaConfig parse_cada(const json& j, std::uint64_t run_seed) {
    const std::string where = "cada.";
    check_keys(j,
               {"latent_dim", "enc_hidden_visual", "enc_hidden_semantic", "dec_hidden_visual",
                "dec_hidden_semantic", "epochs", "batch_size", "lr", "gamma", "delta", "beta",
                "cross_l2", "seed"},
               where);
    cada::CadaConfig c;
    c.latent_dim = get_count(j, "latent_dim", c.latent_dim, where);
    c.enc_hidden_visual = get_count(j, "enc_hidden_visual", c.enc_hidden_visual, where);
    c.enc_hidden_semantic = get_count(j, "enc_hidden_semantic", c.enc_hidden_semantic, where);
    c.dec_hidden_visual = get_count(j, "dec_hidden_visual", c.dec_hidden_visual, where);
    c.dec_hidden_semantic = get_count(j, "dec_hidden_semantic", c.dec_hidden_semantic, where);
    c.epochs = get_count(j, "epochs", c.epochs, where);
    c.batch_size = get_count(j, "batch_size", c.batch_size, where);
    c.lr = get_num(j, "lr", c.lr, where);
    c.gamma_schedule = get_schedule(j, "gamma", c.gamma_schedule, where);
    c.delta_schedule = get_schedule(j, "delta", c.delta_schedule, where);
    c.beta_schedule = get_schedule(j, "beta", c.beta_schedule, where);
    c.cross_l2 = get_bool(j, "cross_l2", c.cross_l2, where);
    c.seed = get_seed(j, "seed", run_seed, where);
    return c;
}

cycle::CycleConfig parse_cycle(const json& j, std::uint64_t run_seed) {
    const std::string where = "cycle.";
    check_keys(j,
               {"noise_dim", "gen_hidden", "critic_hidden", "clip_c", "n_critic", "gamma_cyc",
                "epochs", "batch_size", "lr", "seed"},
               where);
    cycle::CycleConfig c;
    c.noise_dim = get_count(j, "noise_dim", c.noise_dim, where);
    c.gen_hidden = get_count(j, "gen_hidden", c.gen_hidden, where);
    c.critic_hidden = get_count(j, "critic_hidden", c.critic_hidden, where);
    c.clip_c = get_num(j, "clip_c", c.clip_c, where);
    c.n_critic = get_count(j, "n_critic", c.n_critic, where);
    c.gamma_cyc = get_num(j, "gamma_cyc", c.gamma_cyc, where);
    c.epochs = get_count(j, "epochs", c.epochs, where);
    c.batch_size = get_count(j, "batch_size", c.batch_size, where);
    c.lr = get_num(j, "lr", c.lr, where);
    c.seed = get_seed(j, "seed", run_seed, where);
    return c;
}

gate::GateConfig parse_gate(const json& j, std::uint64_t run_seed) {
    const std::string where = "gate.";
    check_keys(j,
               {"dc_hidden", "dc_epochs", "dc_lr", "n_unseen_draws_per_class", "class_balance",
                "seed"},
               where);
    gate::GateConfig c;
    c.dc_hidden = get_count(j, "dc_hidden", c.dc_hidden, where);
    c.dc_epochs = get_count(j, "dc_epochs", c.dc_epochs, where);
    c.dc_lr = get_num(j, "dc_lr", c.dc_lr, where);
    c.n_unseen_draws_per_class =
        get_count(j, "n_unseen_draws_per_class", c.n_unseen_draws_per_class, where);
    c.class_balance = get_bool(j, "class_balance", c.class_balance, where);
    c.seed = get_seed(j, "seed", run_seed, where);
    return c;
}

HeadConfig parse_head(const json& j, std::uint64_t run_seed) {
    const std::string where = "head.";
    check_keys(j, {"hidden", "epochs", "batch_size", "lr", "draws_per_unseen_class", "seed"},
               where);
    HeadConfig c;
    c.hidden = get_count(j, "hidden", c.hidden, where);
    c.epochs = get_count(j, "epochs", c.epochs, where);
    c.batch_size = get_count(j, "batch_size", c.batch_size, where);
    c.lr = get_num(j, "lr", c.lr, where);
    c.draws_per_unseen_class =
        get_count(j, "draws_per_unseen_class", c.draws_per_unseen_class, where);
    c.seed = get_seed(j, "seed", run_seed, where);
    return c;
}

PredictionMode mode_from_alias(const std::string& name, const std::string& origin) {
    if (name == "gzsl" || name == "gzsl_with_dc") return PredictionMode::gzsl_with_dc;
    if (name == "gzsl_plain") return PredictionMode::gzsl_plain;
    if (name == "zsl") return PredictionMode::zsl;
    throw UsageError(origin + " mode '" + name + "' is not one of gzsl, gzsl_plain, zsl");
}

json schedule_json(const cada::WarmupSchedule& s) {
    return {{"rate", s.rate}, {"start_epoch", s.start_epoch}, {"end_epoch", s.end_epoch}};
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source,
                           const CliOverrides& overrides) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError("config " + source + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config " + source + " must be a JSON object");
    check_keys(j,
               {"family", "mode", "seed", "out", "dataset", "synth", "l2_normalize",
                "val_fraction", "cada", "cycle", "gate", "head", "eval"},
               "");

    RunConfig cfg;
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
    } else if (find(j, "seed")) {
        cfg.seed = get_seed(j, "seed", 0, "");
    } else {
        throw UsageError("config " + source + " is missing 'seed' (or pass --seed)");
    }

    const std::string family = get_str(j, "family", "cada", "");
    if (family != "cada" && family != "cycle") {
        throw UsageError("config field 'family' must be cada or cycle, got '" + family + "'");
    }
    cfg.family = family == "cada" ? ModelFamily::cada : ModelFamily::cycle;

    cfg.mode = mode_from_alias(
        overrides.mode ? *overrides.mode : get_str(j, "mode", "gzsl", ""),
        overrides.mode ? "--mode" : "config");
    if (overrides.no_dc && cfg.mode == PredictionMode::gzsl_with_dc) {
        cfg.mode = PredictionMode::gzsl_plain;
    }

    cfg.out_dir = overrides.out ? *overrides.out : get_str(j, "out", cfg.out_dir, "");

    const json* dataset = find(j, "dataset");
    const json* synth = find(j, "synth");
    if ((dataset != nullptr) == (synth != nullptr)) {
        throw UsageError("config " + source + " must set exactly one of 'dataset' and 'synth'");
    }
    if (dataset) {
        if (!dataset->is_string()) throw UsageError("config field 'dataset' must be a path");
        cfg.dataset_dir = dataset->get<std::string>();
    } else {
        if (!synth->is_object()) throw UsageError("config field 'synth' must be an object");
        cfg.synth = parse_synth(*synth, cfg.seed, "synth.");
    }

    cfg.l2_normalize = get_bool(j, "l2_normalize", cfg.l2_normalize, "");
    cfg.val_fraction = get_num(j, "val_fraction", cfg.val_fraction, "");
    if (!(cfg.val_fraction > 0.0) || !(cfg.val_fraction < 1.0)) {
        throw UsageError("config field 'val_fraction' must lie in (0, 1)");
    }

    const json empty = json::object();
    auto obj = [&](const char* key) -> const json& {
        const json* v = find(j, key);
        if (!v) return empty;
        if (!v->is_object()) {
            throw UsageError(std::string("config field '") + key + "' must be an object");
        }
        return *v;
    };
    cfg.cada = parse_cada(obj("cada"), cfg.seed);
    cfg.cycle = parse_cycle(obj("cycle"), cfg.seed);
    cfg.gate = parse_gate(obj("gate"), cfg.seed);
    cfg.head = parse_head(obj("head"), cfg.seed);

    const json& ev = obj("eval");
    check_keys(ev, {"grid"}, "eval.");
    cfg.grid_points = get_count(ev, "grid", cfg.grid_points, "eval.");
    if (overrides.grid) cfg.grid_points = *overrides.grid;
    if (cfg.grid_points == 0) throw UsageError("eval.grid must be at least 1");

    return cfg;
}

std::string effective_config_json(const RunConfig& cfg) {
    json j;
    j["family"] = family_name(cfg.family);
    j["mode"] = mode_name(cfg.mode);
    j["seed"] = cfg.seed;
    j["out"] = cfg.out_dir;
    if (cfg.dataset_dir) {
        j["dataset"] = *cfg.dataset_dir;
    } else if (cfg.synth) {
        j["synth"] = {{"n_seen", cfg.synth->n_seen},
                      {"n_unseen", cfg.synth->n_unseen},
                      {"visual_dim", cfg.synth->visual_dim},
                      {"semantic_dim", cfg.synth->semantic_dim},
                      {"samples_per_class", cfg.synth->samples_per_class},
                      {"cluster_spread", cfg.synth->cluster_spread},
                      {"semantic_noise", cfg.synth->semantic_noise},
                      {"seed", cfg.synth->seed}};
    }
    j["l2_normalize"] = cfg.l2_normalize;
    j["val_fraction"] = cfg.val_fraction;
    j["cada"] = {{"latent_dim", cfg.cada.latent_dim},
                 {"enc_hidden_visual", cfg.cada.enc_hidden_visual},
                 {"enc_hidden_semantic", cfg.cada.enc_hidden_semantic},
                 {"dec_hidden_visual", cfg.cada.dec_hidden_visual},
                 {"dec_hidden_semantic", cfg.cada.dec_hidden_semantic},
                 {"epochs", cfg.cada.epochs},
                 {"batch_size", cfg.cada.batch_size},
                 {"lr", cfg.cada.lr},
                 {"gamma", schedule_json(cfg.cada.gamma_schedule)},
                 {"delta", schedule_json(cfg.cada.delta_schedule)},
                 {"beta", schedule_json(cfg.cada.beta_schedule)},
                 {"cross_l2", cfg.cada.cross_l2},
                 {"seed", cfg.cada.seed}};
    j["cycle"] = {{"noise_dim", cfg.cycle.noise_dim},
                  {"gen_hidden", cfg.cycle.gen_hidden},
                  {"critic_hidden", cfg.cycle.critic_hidden},
                  {"clip_c", cfg.cycle.clip_c},
                  {"n_critic", cfg.cycle.n_critic},
                  {"gamma_cyc", cfg.cycle.gamma_cyc},
                  {"epochs", cfg.cycle.epochs},
                  {"batch_size", cfg.cycle.batch_size},
                  {"lr", cfg.cycle.lr},
                  {"seed", cfg.cycle.seed}};
    j["gate"] = {{"dc_hidden", cfg.gate.dc_hidden},
                 {"dc_epochs", cfg.gate.dc_epochs},
                 {"dc_lr", cfg.gate.dc_lr},
                 {"n_unseen_draws_per_class", cfg.gate.n_unseen_draws_per_class},
                 {"class_balance", cfg.gate.class_balance},
                 {"seed", cfg.gate.seed}};
    j["head"] = {{"hidden", cfg.head.hidden},
                 {"epochs", cfg.head.epochs},
                 {"batch_size", cfg.head.batch_size},
                 {"lr", cfg.head.lr},
                 {"draws_per_unseen_class", cfg.head.draws_per_unseen_class},
                 {"seed", cfg.head.seed}};
    j["eval"] = {{"grid", cfg.grid_points}};
    return j.dump(2) + "\n";
}

} // namespace gzsl::cli
