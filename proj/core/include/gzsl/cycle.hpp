#pragma once

#include <cstdint>
#include <vector>

#include "gzsl/adam.hpp"
#include "gzsl/checkpoint.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/layers.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace gzsl::cycle {

using ad::Tensor;

struct CycleConfig {
    std::size_t noise_dim = 0; // 0 means "same as semantic_dim"
    std::size_t gen_hidden = 4096;
    std::size_t critic_hidden = 4096;
    double clip_c = 0.01;   // critic weights clamped to [-clip_c, clip_c]
    std::size_t n_critic = 5; // critic updates per generator update
    double gamma_cyc = 10.0;  // weight of the semantic cycle term
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double lr = 1e-4;
    std::uint64_t seed = 1;
};

// Conditional WGAN over feature space plus a linear regressor back to the
// semantic space that closes the cycle.
struct CycleModel {
    ad::Mlp gen;        // [semantic+noise] -> hidden (leaky relu) -> feature (relu)
    ad::Mlp critic;     // [feature+semantic] -> hidden (leaky relu) -> 1
    ad::DenseLayer reg; // feature -> semantic, linear

    std::size_t noise_dim = 0;

    std::size_t visual_dim() const { return gen.out_dim(); }
    std::size_t semantic_dim() const { return reg.out_dim(); }
    std::vector<Tensor> gen_params() const;
    std::vector<Tensor> critic_params() const;
    std::vector<Tensor> reg_params() const;
};

CycleModel make_cycle_model(std::size_t visual_dim, std::size_t semantic_dim,
                            const CycleConfig& cfg, Rng& rng);

Tensor draw_gen_noise(std::size_t rows, const CycleModel& m, Rng& rng);

// One generated feature row per semantic row.
Tensor generate(const CycleModel& m, const Tensor& semantic_rows, const Tensor& noise);
Tensor generate(const CycleModel& m, const Tensor& semantic_rows, Rng& rng);

Tensor critic_score(const CycleModel& m, const Tensor& features, const Tensor& semantics);

// Feature rows conditioned on matching semantic rows.
struct ConditionedBatch {
    Tensor features;
    Tensor semantics;
};

struct CriticLosses {
    Tensor critic_loss;    // -(mean critic(real) - mean critic(fake))
    Tensor generator_loss; // -mean critic(fake)
};

CriticLosses critic_losses(const CycleModel& m, const ConditionedBatch& real,
                           const ConditionedBatch& fake);

Tensor regress(const CycleModel& m, const Tensor& features);

// Mean over the batch of the squared L2 distance between original and
// regressed semantics.
Tensor cycle_loss(const Tensor& semantics, const Tensor& regressed);

// One critic step: losses on a real batch vs freshly generated (detached)
// fakes, Adam update, then weight clipping. Returns the critic loss value.
double critic_update(CycleModel& m, ad::AdamState& critic_adam, const ConditionedBatch& real,
                     const CycleConfig& cfg, Rng& rng);

// One generator+regressor step on the WGAN objective plus the cycle term.
// Returns {generator_loss, cycle_loss} values.
std::pair<double, double> generator_update(CycleModel& m, ad::AdamState& gen_adam,
                                           const Tensor& semantics, const CycleConfig& cfg,
                                           Rng& rng);

struct CycleEpochLoss {
    double critic = 0, generator = 0, cycle = 0;
};

struct CycleTrainResult {
    CycleModel model;
    std::vector<CycleEpochLoss> history;
};

CycleTrainResult train_cycle(const data::Dataset& ds, const CycleConfig& cfg);

struct LabeledFeatures {
    Tensor features; // [n x visual_dim]
    std::vector<std::uint32_t> labels;
};

// n_per_class generated rows for each listed class, conditioned on the
// class embeddings of ds.
LabeledFeatures synth_features(const CycleModel& m, const data::Dataset& ds,
                               const std::vector<std::uint32_t>& classes,
                               std::size_t n_per_class, Rng& rng);

ad::Checkpoint to_checkpoint(const CycleModel& m);
CycleModel cycle_from_checkpoint(const ad::Checkpoint& ckpt);

} // namespace gzsl::cycle
