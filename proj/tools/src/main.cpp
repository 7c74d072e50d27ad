#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gzsl/cada.hpp"
#include "gzsl/cycle.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/eval.hpp"
#include "gzsl/gate.hpp"
#include "gzsl/gradcheck_suite.hpp"
#include "gzsl/log.hpp"
#include "gzsl/pipeline.hpp"
#include "gzsl/synth.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gzsl;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw cli::UsageError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

data::Dataset prepare_dataset(const cli::RunConfig& cfg) {
    data::Dataset ds;
    if (cfg.dataset_dir) {
        ds = data::load_dataset(*cfg.dataset_dir, {cfg.l2_normalize});
    } else {
        ds = data::synth_benchmark(*cfg.synth);
    }
    if (ds.val_classes.empty()) {
        ds.val_classes = data::derive_val_classes(ds, cfg.val_fraction, cfg.seed);
    }
    return ds;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os || !(os << text)) throw DataError("cannot write " + path.string());
}

void write_history_csv(const fs::path& path, const std::string& header,
                       const std::vector<std::vector<double>>& rows) {
    std::ostringstream ss;
    ss << header << "\n";
    char buf[40];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ss << i;
        for (double v : rows[i]) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            ss << buf;
        }
        ss << "\n";
    }
    write_text(path, ss.str());
}

void print_report(const eval::EvalReport& r) {
    if (r.mode == PredictionMode::zsl) {
        std::printf("%-14s acc_unseen=%.4f\n", mode_name(r.mode).c_str(), r.acc_unseen);
        return;
    }
    std::printf("%-14s acc_seen=%.4f acc_unseen=%.4f h_mean=%.4f ausuc=%.4f\n",
                mode_name(r.mode).c_str(), r.acc_seen, r.acc_unseen, r.h, r.ausuc);
}

int cmd_train(const cli::RunConfig& cfg) {
    data::Dataset ds = prepare_dataset(cfg);
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);

    Pipeline p;
    p.family = cfg.family;
    p.mode = cfg.mode;
    p.class_domains = class_domains_of(ds);

    if (cfg.family == ModelFamily::cada) {
        log_info("train: training vae pair on " +
                              std::to_string(data::effective_train_idx(ds).size()) + " rows");
        cada::CadaTrainResult r = cada::train_cada(ds, cfg.cada);
        p.cada_model = std::move(r.model);
        std::vector<std::vector<double>> hist;
        for (const auto& h : r.history) {
            hist.push_back({h.recon, h.kl, h.cross, h.dist, h.weighted_total});
        }
        write_history_csv(out / "latent_history.csv",
                          "epoch,recon,kl,cross,dist,weighted_total", hist);
    } else {
        log_info("train: training wgan on " +
                              std::to_string(data::effective_train_idx(ds).size()) + " rows");
        cycle::CycleTrainResult r = cycle::train_cycle(ds, cfg.cycle);
        p.cycle_model = std::move(r.model);
        std::vector<std::vector<double>> hist;
        for (const auto& h : r.history) hist.push_back({h.critic, h.generator, h.cycle});
        write_history_csv(out / "latent_history.csv", "epoch,critic,generator,cycle", hist);
    }

    LatentSpace space = p.latent_space();
    Rng master(cfg.seed);
    Rng head_rng = master.fork();
    Rng dc_rng = master.fork();
    Rng cal_rng = master.fork();

    LabeledLatents head_set = build_head_training_set(space, ds, cfg.head, head_rng);
    log_info("train: head training set: " + std::to_string(head_set.labels.size()) + " rows");
    std::vector<double> head_hist;
    p.head = train_head(head_set, ds.num_classes(), cfg.head, &head_hist);
    write_history_csv(out / "head_history.csv", "epoch,loss", [&] {
        std::vector<std::vector<double>> rows;
        for (double v : head_hist) rows.push_back({v});
        return rows;
    }());

    if (cfg.mode == PredictionMode::gzsl_with_dc) {
        gate::DomainSet dc_set = build_dc_training_set(space, ds, cfg.gate, dc_rng);
        log_info("train: domain training set: " + std::to_string(dc_set.labels.size()) +
                              " rows (" + std::to_string(dc_set.count(gate::DomainLabel::seen)) +
                              " seen)");
        std::vector<double> dc_hist;
        p.dc = gate::train_dc(dc_set, cfg.gate, &dc_hist);
        write_history_csv(out / "dc_history.csv", "epoch,loss", [&] {
            std::vector<std::vector<double>> rows;
            for (double v : dc_hist) rows.push_back({v});
            return rows;
        }());
        gate::DomainSet cal_set = build_calibration_set(space, ds, cfg.gate, cal_rng);
        gate::calibrate(*p.dc, cal_set);
    }

    const std::string effective = cli::effective_config_json(cfg);
    write_text(out / "effective_config.json", effective);
    json extra;
    extra["run_config"] = json::parse(effective);
    save_pipeline(out, p, extra.dump());

    std::printf("trained %s pipeline (%s) -> %s\n", family_name(cfg.family).c_str(),
                mode_name(cfg.mode).c_str(), out.string().c_str());
    return 0;
}

struct EvalArgs {
    std::string manifest;
    std::optional<std::string> data_dir;
    std::optional<std::string> out_dir;
    std::optional<std::string> mode;
    bool no_dc = false;
    std::optional<std::size_t> grid;
};

data::Dataset dataset_for_eval(const EvalArgs& args, const json& manifest) {
    bool l2 = false;
    const json* run_cfg = manifest.contains("run_config") ? &manifest["run_config"] : nullptr;
    if (run_cfg && run_cfg->contains("l2_normalize")) {
        l2 = (*run_cfg)["l2_normalize"].get<bool>();
    }
    if (args.data_dir) return data::load_dataset(*args.data_dir, {l2});
    if (!run_cfg) {
        throw cli::UsageError("manifest records no dataset; pass --data DIR");
    }
    if (run_cfg->contains("dataset")) {
        return data::load_dataset((*run_cfg)["dataset"].get<std::string>(), {l2});
    }
    if (run_cfg->contains("synth")) {
        const json& s = (*run_cfg)["synth"];
        data::SynthSpec spec;
        spec.n_seen = s.at("n_seen").get<std::size_t>();
        spec.n_unseen = s.at("n_unseen").get<std::size_t>();
        spec.visual_dim = s.at("visual_dim").get<std::size_t>();
        spec.semantic_dim = s.at("semantic_dim").get<std::size_t>();
        spec.samples_per_class = s.at("samples_per_class").get<std::size_t>();
        spec.cluster_spread = s.at("cluster_spread").get<double>();
        spec.semantic_noise = s.at("semantic_noise").get<double>();
        spec.seed = s.at("seed").get<std::uint64_t>();
        return data::synth_benchmark(spec);
    }
    throw cli::UsageError("manifest records no dataset; pass --data DIR");
}

int cmd_eval(const EvalArgs& args) {
    Pipeline p = load_pipeline(args.manifest);
    json manifest;
    try {
        manifest = json::parse(read_manifest_text(args.manifest));
    } catch (const json::exception& e) {
        throw DataError("manifest is not valid JSON: " + std::string(e.what()));
    }
    data::Dataset ds = dataset_for_eval(args, manifest);

    PredictionMode mode = p.mode;
    if (args.mode) {
        mode = args.mode == "zsl" ? PredictionMode::zsl : PredictionMode::gzsl_with_dc;
    }
    if (args.no_dc && mode == PredictionMode::gzsl_with_dc) mode = PredictionMode::gzsl_plain;
    if (mode == PredictionMode::gzsl_with_dc && !p.dc) {
        throw cli::UsageError("pipeline was trained without a domain classifier; use --no-dc");
    }

    std::size_t grid = 201;
    if (manifest.contains("run_config") && manifest["run_config"].contains("eval")) {
        grid = manifest["run_config"]["eval"]["grid"].get<std::size_t>();
    }
    if (args.grid) grid = *args.grid;

    eval::EvalReport report = eval::full_report(p, ds, grid, mode);

    const fs::path out = args.out_dir
                             ? fs::path(*args.out_dir)
                             : (fs::is_directory(args.manifest)
                                    ? fs::path(args.manifest)
                                    : fs::path(args.manifest).parent_path());
    fs::create_directories(out);
    eval::write_report_json(out / ("report_" + mode_name(mode) + ".json"), report);
    if (!report.curve.empty()) {
        eval::write_curve_csv(out / ("curve_" + mode_name(mode) + ".csv"), report.curve);
    }
    print_report(report);
    return 0;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, bool force) {
    json j;
    try {
        j = json::parse(slurp(config_path));
    } catch (const json::exception& e) {
        throw cli::UsageError("config " + config_path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw cli::UsageError("synth config must be a JSON object");
    const json& spec_json = j.contains("synth") ? j["synth"] : j;

    data::SynthSpec spec;
    spec.n_seen = spec_json.value("n_seen", spec.n_seen);
    spec.n_unseen = spec_json.value("n_unseen", spec.n_unseen);
    spec.visual_dim = spec_json.value("visual_dim", spec.visual_dim);
    spec.semantic_dim = spec_json.value("semantic_dim", spec.semantic_dim);
    spec.samples_per_class = spec_json.value("samples_per_class", spec.samples_per_class);
    spec.cluster_spread = spec_json.value("cluster_spread", spec.cluster_spread);
    spec.semantic_noise = spec_json.value("semantic_noise", spec.semantic_noise);
    spec.seed = spec_json.value("seed", spec.seed);
    if (seed) spec.seed = *seed;

    const fs::path out(out_dir);
    if (fs::exists(out) && !fs::is_empty(out) && !force) {
        throw cli::UsageError("target " + out.string() + " is not empty; pass --force");
    }

    data::Dataset ds = data::synth_benchmark(spec);
    data::save_dataset(out, ds);
    std::printf("wrote %zu samples, %zu classes -> %s\n", ds.n(), ds.num_classes(),
                out.string().c_str());
    return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
    const auto outcomes = run_gradcheck_cases(standard_gradcheck_cases(seed), 1e-6);
    bool all_passed = true;
    for (const auto& o : outcomes) {
        std::printf("%s %-24s max_rel_error=%.3e worst=%s\n", o.passed ? "PASS" : "FAIL",
                    o.name.c_str(), o.max_rel_error, o.worst_param.c_str());
        all_passed &= o.passed;
    }
    return all_passed ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized zero-shot learning toolkit"};
    app.require_subcommand(1);

    std::string config_path, synth_out;
    cli::CliOverrides overrides;
    std::uint64_t seed_flag = 0;
    std::string out_flag, mode_flag;
    std::size_t grid_flag = 0;
    bool force = false;

    EvalArgs eval_args;
    std::string eval_data, eval_out;

    // each() callbacks fire during validation, before CLI11 assigns the bound
    // variables, so overrides must be taken from the raw value.
    auto parse_size = [](const std::string& v) -> std::optional<std::size_t> {
        try {
            return static_cast<std::size_t>(std::stoull(v));
        } catch (const std::exception&) {
            return std::nullopt; // CLI11's own conversion will reject it
        }
    };
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_flag, "Override the config seed")
            ->each([&, parse_size](const std::string& v) {
                if (auto s = parse_size(v)) overrides.seed = *s;
            });
        cmd->add_option("--out", out_flag, "Override the output directory")
            ->each([&](const std::string& v) { overrides.out = v; });
        cmd->add_option("--mode", mode_flag, "Prediction mode")
            ->check(CLI::IsMember({"gzsl", "zsl"}))
            ->each([&](const std::string& v) { overrides.mode = v; });
        cmd->add_flag("--no-dc", overrides.no_dc, "Disable the domain gate");
        cmd->add_option("--grid", grid_flag, "Points in the score sweep")
            ->each([&, parse_size](const std::string& v) {
                if (auto s = parse_size(v)) overrides.grid = *s;
            });
    };

    CLI::App* train = app.add_subcommand("train", "Train a pipeline from a run config");
    train->add_option("--config", config_path, "JSON run config")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(train);

    auto add_eval_opts = [&](CLI::App* cmd) {
        cmd->add_option("manifest", eval_args.manifest, "Pipeline manifest or its directory")
            ->required();
        cmd->add_option("--data", eval_data, "Dataset directory")
            ->each([&](const std::string& v) { eval_args.data_dir = v; });
        cmd->add_option("--out", eval_out, "Directory for report files")
            ->each([&](const std::string& v) { eval_args.out_dir = v; });
        cmd->add_option("--mode", mode_flag, "Prediction mode")
            ->check(CLI::IsMember({"gzsl", "zsl"}))
            ->each([&](const std::string& v) { eval_args.mode = v; });
        cmd->add_flag("--no-dc", eval_args.no_dc, "Evaluate without the domain gate");
        cmd->add_option("--grid", grid_flag, "Points in the score sweep")
            ->each([&, parse_size](const std::string& v) {
                if (auto s = parse_size(v)) eval_args.grid = *s;
            });
    };
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a trained pipeline");
    add_eval_opts(eval_cmd);
    CLI::App* ausuc_cmd = app.add_subcommand("ausuc", "Evaluate a trained pipeline (alias)");
    add_eval_opts(ausuc_cmd);

    CLI::App* synth = app.add_subcommand("synth", "Write a synthetic benchmark dataset");
    synth->add_option("--config", config_path, "JSON file with a synth spec")
        ->required()
        ->check(CLI::ExistingFile);
    synth->add_option("--out", synth_out, "Target directory")->required();
    synth->add_option("--seed", seed_flag, "Override the spec seed")
        ->each([&, parse_size](const std::string& v) {
            if (auto s = parse_size(v)) overrides.seed = *s;
        });
    synth->add_flag("--force", force, "Overwrite a non-empty target");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of all losses");
    gradcheck->add_option("--seed", seed_flag, "Toy instance seed")
        ->each([&, parse_size](const std::string& v) {
            if (auto s = parse_size(v)) overrides.seed = *s;
        });

    try {
        app.parse(argc, argv);

        if (train->parsed()) {
            return cmd_train(cli::parse_run_config(slurp(config_path), config_path, overrides));
        }
        if (eval_cmd->parsed() || ausuc_cmd->parsed()) {
            return cmd_eval(eval_args);
        }
        if (synth->parsed()) {
            return cmd_synth(config_path, synth_out, overrides.seed, force);
        }
        if (gradcheck->parsed()) {
            return cmd_gradcheck(overrides.seed.value_or(1234));
        }
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const cli::UsageError& e) {
        log_error(std::string("cli: ") + e.what());
        return 1;
    } catch (const DataError& e) {
        log_error(std::string("cli: ") + e.what());
        return 2;
    } catch (const NumericError& e) {
        log_error(std::string("cli: ") + e.what());
        return 3;
    } catch (const std::exception& e) {
        log_error(std::string("cli: ") + e.what());
        return 1;
    }
}
