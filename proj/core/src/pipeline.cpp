#include "gzsl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gzsl/adam.hpp"
#include "gzsl/error.hpp"
#include "gzsl/log.hpp"
#include "gzsl/net_io.hpp"
#include "gzsl/ops.hpp"

namespace gzsl {

using json = nlohmann::json;

std::string family_name(ModelFamily f) {
    return f == ModelFamily::cada ? "cada" : "cycle";
}

ModelFamily parse_family(const std::string& name) {
    if (name == "cada") return ModelFamily::cada;
    if (name == "cycle") return ModelFamily::cycle;
    throw DataError("unknown model family '" + name + "' (expected cada or cycle)");
}

std::string mode_name(PredictionMode m) {
    switch (m) {
        case PredictionMode::gzsl_with_dc: return "gzsl_with_dc";
        case PredictionMode::gzsl_plain: return "gzsl_plain";
        case PredictionMode::zsl: return "zsl";
    }
    throw ContractError("mode_name: unhandled mode");
}

PredictionMode parse_mode(const std::string& name) {
    if (name == "gzsl_with_dc") return PredictionMode::gzsl_with_dc;
    if (name == "gzsl_plain") return PredictionMode::gzsl_plain;
    if (name == "zsl") return PredictionMode::zsl;
    throw DataError("unknown prediction mode '" + name + "'");
}

LabeledLatents build_head_training_set(const LatentSpace& space, const data::Dataset& ds,
                                       const HeadConfig& cfg, Rng& rng) {
    if (cfg.draws_per_unseen_class == 0) {
        throw ContractError("build_head_training_set: draws_per_unseen_class must be >= 1");
    }
    std::vector<double> buf;
    std::vector<std::uint32_t> labels;

    if (!ds.train_idx.empty()) {
        ad::Tensor encoded = space.sample_visual(data::visual_rows(ds, ds.train_idx), 1, rng);
        auto d = encoded.data();
        buf.insert(buf.end(), d.begin(), d.end());
        auto lab = data::labels_at(ds, ds.train_idx);
        labels.insert(labels.end(), lab.begin(), lab.end());
    }

    const std::vector<std::uint32_t> unseen(ds.unseen_classes.begin(), ds.unseen_classes.end());
    if (!unseen.empty()) {
        ad::Tensor drawn = space.sample_semantic(data::semantic_rows(ds, unseen),
                                                 cfg.draws_per_unseen_class, rng);
        auto d = drawn.data();
        buf.insert(buf.end(), d.begin(), d.end());
        for (std::uint32_t c : unseen) {
            labels.insert(labels.end(), cfg.draws_per_unseen_class, c);
        }
    }

    LabeledLatents set;
    set.latents = ad::Tensor::from_data({labels.size(), space.latent_dim}, std::move(buf));
    set.labels = std::move(labels);
    return set;
}

ClassHead train_head(const LabeledLatents& set, std::size_t num_classes, const HeadConfig& cfg,
                     std::vector<double>* loss_history) {
    const std::size_t n = set.labels.size();
    if (n == 0) throw ContractError("train_head: empty training set");
    if (set.latents.rank() != 2 || set.latents.dim(0) != n) {
        throw ShapeError("train_head: latents " + ad::shape_str(set.latents.shape()) +
                             " do not match " + std::to_string(n) + " labels");
    }
    if (cfg.batch_size == 0) throw ContractError("train_head: batch_size must be >= 1");

    std::vector<bool> present(num_classes, false);
    for (std::uint32_t y : set.labels) {
        if (y >= num_classes) {
            throw ContractError("train_head: label " + std::to_string(y) + " outside the " +
                                std::to_string(num_classes) + "-class space");
        }
        present[y] = true;
    }
    std::string missing;
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (!present[c]) missing += (missing.empty() ? "" : ", ") + std::to_string(c);
    }
    if (!missing.empty()) {
        throw ContractError("train_head: classes absent from training set: " + missing);
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> dims{set.latents.dim(1)};
    if (cfg.hidden > 0) dims.push_back(cfg.hidden);
    dims.push_back(num_classes);
    ClassHead head{ad::make_mlp(dims, ad::Activation::relu, ad::Activation::identity, rng)};

    std::vector<ad::Tensor> params = ad::params_of(head.mlp);
    ad::AdamState adam = ad::make_adam(params, cfg.lr);

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    const std::size_t z = set.latents.dim(1);
    auto latent_data = set.latents.data();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, n - start);
            std::vector<double> xb(b * z);
            std::vector<std::uint32_t> yb(b);
            for (std::size_t r = 0; r < b; ++r) {
                const std::uint32_t src = order[start + r];
                std::copy_n(latent_data.begin() + src * z, z, xb.begin() + r * z);
                yb[r] = set.labels[src];
            }
            ad::Tensor x = ad::Tensor::from_data({b, z}, std::move(xb));
            ad::Tensor loss = ad::softmax_cross_entropy(head.mlp.forward(x), yb);
            if (!std::isfinite(loss.value())) {
                throw NumericError("train_head: non-finite loss at epoch " +
                                   std::to_string(epoch));
            }
            ad::zero_grad(params);
            ad::backward(loss);
            ad::adam_step(params, adam);
            epoch_loss += loss.value() * static_cast<double>(b);
        }
        epoch_loss /= static_cast<double>(n);
        if (loss_history) loss_history->push_back(epoch_loss);
        log_debug("head: epoch " + std::to_string(epoch) + " loss " +
                              std::to_string(epoch_loss));
    }
    return head;
}

LatentSpace Pipeline::latent_space() const {
    if (family == ModelFamily::cada) {
        if (!cada_model) throw ContractError("pipeline: cada family without a cada model");
        return latent_space_of(*cada_model);
    }
    if (!cycle_model) throw ContractError("pipeline: cycle family without a cycle model");
    return latent_space_of(*cycle_model);
}

std::size_t Pipeline::visual_dim() const {
    if (family == ModelFamily::cada) {
        if (!cada_model) throw ContractError("pipeline: cada family without a cada model");
        return cada_model->visual_dim();
    }
    if (!cycle_model) throw ContractError("pipeline: cycle family without a cycle model");
    return cycle_model->visual_dim();
}

namespace {

std::uint32_t argmax_row(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return static_cast<std::uint32_t>(best);
}

} // namespace

Predictions predict(const Pipeline& p, const ad::Tensor& visuals, PredictionMode mode) {
    if (visuals.rank() != 2 || visuals.dim(1) != p.visual_dim()) {
        throw ShapeError("predict: expected [n x " + std::to_string(p.visual_dim()) +
                             "] visuals, got " + ad::shape_str(visuals.shape()));
    }
    const std::size_t c = p.num_classes();
    if (p.class_domains.size() != c) {
        throw ContractError("predict: " + std::to_string(p.class_domains.size()) +
                            " domain assignments for " + std::to_string(c) + " classes");
    }

    LatentSpace space = p.latent_space();
    ad::Tensor z = space.embed_visual(visuals);
    std::vector<double> probs = ad::softmax_rows(p.head.mlp.forward(z));
    const std::size_t n = visuals.dim(0);

    std::vector<double> dp;
    if (mode == PredictionMode::gzsl_with_dc) {
        if (!p.dc) throw ContractError("predict: gated mode requires a domain classifier");
        dp = gate::domain_probs(*p.dc, z);
    }
    bool any_unseen = false;
    for (gate::DomainLabel d : p.class_domains) any_unseen |= d == gate::DomainLabel::unseen;
    if (mode == PredictionMode::zsl && !any_unseen) {
        throw ContractError("predict: zsl mode with no unseen classes");
    }

    Predictions out;
    out.num_classes = c;
    out.scores.resize(n * c);
    out.class_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> row(probs.data() + i * c, c);
        std::span<double> dst(out.scores.data() + i * c, c);
        switch (mode) {
            case PredictionMode::gzsl_plain:
                std::copy(row.begin(), row.end(), dst.begin());
                break;
            case PredictionMode::zsl:
                for (std::size_t y = 0; y < c; ++y) {
                    dst[y] = p.class_domains[y] == gate::DomainLabel::unseen ? row[y] : 0.0;
                }
                break;
            case PredictionMode::gzsl_with_dc: {
                auto gated = gate::gate(row, dp[2 * i], dp[2 * i + 1], p.class_domains);
                std::copy(gated.begin(), gated.end(), dst.begin());
                break;
            }
        }
        if (mode == PredictionMode::zsl) {
            // Zeroed seen entries could still win argmax when every unseen
            // probability underflows; restrict the scan instead.
            std::size_t best = c;
            for (std::size_t y = 0; y < c; ++y) {
                if (p.class_domains[y] != gate::DomainLabel::unseen) continue;
                if (best == c || dst[y] > dst[best]) best = y;
            }
            out.class_ids[i] = static_cast<std::uint32_t>(best);
        } else {
            out.class_ids[i] = argmax_row(dst);
        }
    }
    return out;
}

Predictions predict(const Pipeline& p, const ad::Tensor& visuals) {
    return predict(p, visuals, p.mode);
}

std::vector<gate::DomainLabel> class_domains_of(const data::Dataset& ds) {
    const std::size_t c = ds.num_classes();
    std::vector<gate::DomainLabel> domains(c, gate::DomainLabel::seen);
    for (std::size_t y = 0; y < c; ++y) {
        const auto cls = static_cast<std::uint32_t>(y);
        const bool seen = ds.seen_classes.count(cls) > 0;
        const bool unseen = ds.unseen_classes.count(cls) > 0;
        if (seen == unseen) {
            throw ContractError("class " + std::to_string(y) +
                                (seen ? " belongs to both domains" : " belongs to no domain"));
        }
        domains[y] = seen ? gate::DomainLabel::seen : gate::DomainLabel::unseen;
    }
    return domains;
}

namespace {

constexpr int kManifestVersion = 1;

std::filesystem::path manifest_path_of(const std::filesystem::path& p) {
    return std::filesystem::is_directory(p) ? p / "manifest.json" : p;
}

} // namespace

void save_pipeline(const std::filesystem::path& dir, const Pipeline& p,
                   const std::string& extra_json) {
    if (p.class_domains.size() != p.num_classes()) {
        throw ContractError("save_pipeline: domain map does not cover the class space");
    }
    std::filesystem::create_directories(dir);

    json m;
    m["format"] = "gzsl-pipeline";
    m["version"] = kManifestVersion;
    m["family"] = family_name(p.family);
    m["mode"] = mode_name(p.mode);
    m["num_classes"] = p.num_classes();
    json domains = json::array();
    for (gate::DomainLabel d : p.class_domains) {
        domains.push_back(d == gate::DomainLabel::seen ? "seen" : "unseen");
    }
    m["class_domains"] = std::move(domains);

    const std::string latent_name = family_name(p.family) + ".ckpt";
    if (p.family == ModelFamily::cada) {
        if (!p.cada_model) throw ContractError("save_pipeline: missing cada model");
        ad::save_checkpoint(dir / latent_name, cada::to_checkpoint(*p.cada_model));
    } else {
        if (!p.cycle_model) throw ContractError("save_pipeline: missing cycle model");
        ad::save_checkpoint(dir / latent_name, cycle::to_checkpoint(*p.cycle_model));
    }
    m["latent_checkpoint"] = latent_name;

    ad::Checkpoint head_ckpt;
    ad::checkpoint_add_mlp(head_ckpt, "head", p.head.mlp);
    ad::save_checkpoint(dir / "head.ckpt", head_ckpt);
    m["head_checkpoint"] = "head.ckpt";

    if (p.dc) {
        gate::save_dc(dir / "dc.ckpt", *p.dc);
        m["dc_checkpoint"] = "dc.ckpt";
        m["dc_temperature"] = p.dc->temperature;
    }

    if (!extra_json.empty()) {
        json extra = json::parse(extra_json, nullptr, true);
        if (!extra.is_object()) {
            throw ContractError("save_pipeline: extra manifest fields must form an object");
        }
        for (auto& [k, v] : extra.items()) m[k] = v;
    }

    std::ofstream os(dir / "manifest.json");
    if (!os || !(os << m.dump(2) << "\n")) {
        throw DataError("cannot write " + (dir / "manifest.json").string());
    }
}

std::string read_manifest_text(const std::filesystem::path& manifest) {
    const auto path = manifest_path_of(manifest);
    std::ifstream is(path);
    if (!is) throw DataError("cannot open manifest " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Pipeline load_pipeline(const std::filesystem::path& manifest) {
    const auto path = manifest_path_of(manifest);
    const auto dir = path.parent_path();

    json m;
    try {
        m = json::parse(read_manifest_text(path));
    } catch (const json::exception& e) {
        throw DataError("manifest " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        if (m.at("format").get<std::string>() != "gzsl-pipeline") {
            throw DataError("manifest " + path.string() + " has an unexpected format tag");
        }
        if (m.at("version").get<int>() != kManifestVersion) {
            throw DataError("manifest " + path.string() + " has unsupported version");
        }

        Pipeline p;
        p.family = parse_family(m.at("family").get<std::string>());
        p.mode = parse_mode(m.at("mode").get<std::string>());
        const auto num_classes = m.at("num_classes").get<std::size_t>();
        for (const auto& d : m.at("class_domains")) {
            const std::string s = d.get<std::string>();
            if (s != "seen" && s != "unseen") {
                throw DataError("manifest domain entry '" + s + "' is not seen/unseen");
            }
            p.class_domains.push_back(s == "seen" ? gate::DomainLabel::seen
                                                  : gate::DomainLabel::unseen);
        }
        if (p.class_domains.size() != num_classes) {
            throw DataError("manifest lists " + std::to_string(p.class_domains.size()) +
                            " domains for " + std::to_string(num_classes) + " classes");
        }

        const auto latent_path = dir / m.at("latent_checkpoint").get<std::string>();
        std::size_t latent_dim = 0;
        if (p.family == ModelFamily::cada) {
            p.cada_model = cada::cada_from_checkpoint(ad::load_checkpoint(latent_path));
            latent_dim = p.cada_model->latent_dim();
        } else {
            p.cycle_model = cycle::cycle_from_checkpoint(ad::load_checkpoint(latent_path));
            latent_dim = p.cycle_model->visual_dim();
        }

        const auto head_path = dir / m.at("head_checkpoint").get<std::string>();
        p.head.mlp = ad::mlp_from_checkpoint(ad::load_checkpoint(head_path), "head",
                                             ad::Activation::relu, ad::Activation::identity);
        if (p.head.num_classes() != num_classes) {
            throw DataError("head checkpoint classifies " +
                            std::to_string(p.head.num_classes()) + " classes, manifest says " +
                            std::to_string(num_classes));
        }
        if (p.head.mlp.in_dim() != latent_dim) {
            throw DataError("head checkpoint expects " + std::to_string(p.head.mlp.in_dim()) +
                            "-d latents, model produces " + std::to_string(latent_dim) + "-d");
        }

        if (m.contains("dc_checkpoint")) {
            p.dc = gate::load_dc(dir / m.at("dc_checkpoint").get<std::string>());
            if (p.dc->mlp.in_dim() != latent_dim) {
                throw DataError("domain classifier expects " +
                                std::to_string(p.dc->mlp.in_dim()) + "-d latents, model produces " +
                                std::to_string(latent_dim) + "-d");
            }
        }
        if (p.mode == PredictionMode::gzsl_with_dc && !p.dc) {
            throw DataError("manifest mode is gzsl_with_dc but no dc_checkpoint is listed");
        }
        return p;
    } catch (const json::exception& e) {
        throw DataError("manifest " + path.string() + " is missing required fields: " + e.what());
    }
}

} // namespace gzsl
