#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gzsl/cada.hpp"
#include "gzsl/cycle.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/gate.hpp"
#include "gzsl/latent_space.hpp"
#include "gzsl/layers.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace gzsl {

enum class ModelFamily { cada, cycle };
enum class PredictionMode { gzsl_with_dc, gzsl_plain, zsl };

std::string family_name(ModelFamily f);
ModelFamily parse_family(const std::string& name);
std::string mode_name(PredictionMode m);
PredictionMode parse_mode(const std::string& name);

struct HeadConfig {
    std::size_t hidden = 0; // 0 means a single linear layer
    std::size_t epochs = 40;
    std::size_t batch_size = 128;
    double lr = 1e-3;
    std::size_t draws_per_unseen_class = 200;
    std::uint64_t seed = 1;
};

// Softmax classifier over all C classes, fed latent vectors.
struct ClassHead {
    ad::Mlp mlp;

    std::size_t num_classes() const { return mlp.out_dim(); }
};

struct LabeledLatents {
    ad::Tensor latents; // [n x latent_dim]
    std::vector<std::uint32_t> labels;
};

// Seen classes contribute one latent draw per real training visual (all seen
// classes, held-out ones included, so the head covers the full label space);
// unseen classes contribute draws_per_unseen_class semantic-derived rows.
LabeledLatents build_head_training_set(const LatentSpace& space, const data::Dataset& ds,
                                       const HeadConfig& cfg, Rng& rng);

ClassHead train_head(const LabeledLatents& set, std::size_t num_classes, const HeadConfig& cfg,
                     std::vector<double>* loss_history = nullptr);

struct Pipeline {
    ModelFamily family = ModelFamily::cada;
    std::optional<cada::CadaModel> cada_model;
    std::optional<cycle::CycleModel> cycle_model;
    ClassHead head;
    std::optional<gate::DomainClassifier> dc;
    std::vector<gate::DomainLabel> class_domains; // indexed by class id
    PredictionMode mode = PredictionMode::gzsl_with_dc;

    LatentSpace latent_space() const;
    std::size_t visual_dim() const;
    std::size_t num_classes() const { return head.num_classes(); }
};

struct Predictions {
    std::vector<std::uint32_t> class_ids;
    std::vector<double> scores; // [n x num_classes], the scores fed to argmax
    std::size_t num_classes = 0;

    std::span<const double> score_row(std::size_t i) const {
        return {scores.data() + i * num_classes, num_classes};
    }
};

// Deterministic: the latent is the visual embedding (no sampling). Scores
// are the head's softmax, gated by the domain classifier in gzsl_with_dc
// mode and masked to unseen classes in zsl mode. Ties resolve to the lowest
// class id.
Predictions predict(const Pipeline& p, const ad::Tensor& visuals, PredictionMode mode);
Predictions predict(const Pipeline& p, const ad::Tensor& visuals);

// Domain assignment from the dataset's class sets; every class must belong
// to exactly one side.
std::vector<gate::DomainLabel> class_domains_of(const data::Dataset& ds);

// Writes manifest.json plus the referenced checkpoints into dir. `extra`
// fields (e.g. the generating synth spec) are embedded into the manifest
// under their own keys.
void save_pipeline(const std::filesystem::path& dir, const Pipeline& p,
                   const std::string& extra_json = "");
// Accepts the manifest path or its directory.
Pipeline load_pipeline(const std::filesystem::path& manifest);
// Raw manifest text, for callers that need the extra fields back.
std::string read_manifest_text(const std::filesystem::path& manifest);

} // namespace gzsl
