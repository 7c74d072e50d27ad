#pragma once

#include <cstdint>
#include <vector>

#include "gzsl/checkpoint.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/gradcheck.hpp"
#include "gzsl/layers.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace gzsl::cada {

using ad::Tensor;

// Linear warm-up: 0 before start_epoch, rate*(epoch-start_epoch) inside
// [start_epoch, end_epoch], frozen at rate*(end_epoch-start_epoch) after.
struct WarmupSchedule {
    double rate = 0.0;
    int start_epoch = 0;
    int end_epoch = 0;
};

double warmup_weight(const WarmupSchedule& s, int epoch);

struct CadaConfig {
    std::size_t latent_dim = 64;
    std::size_t enc_hidden_visual = 1560;
    std::size_t enc_hidden_semantic = 1450;
    std::size_t dec_hidden_visual = 1560;
    std::size_t dec_hidden_semantic = 660;
    std::size_t epochs = 100;
    std::size_t batch_size = 52;
    double lr = 1.5e-3;
    WarmupSchedule gamma_schedule{0.044, 21, 75};  // cross-alignment weight
    WarmupSchedule delta_schedule{0.0026, 0, 90};  // distribution-alignment weight
    WarmupSchedule beta_schedule{0.0026, 0, 90};   // KL weight
    bool cross_l2 = false; // squared-L2 cross reconstruction instead of L1
    std::uint64_t seed = 1;
};

enum class Modality { visual, semantic };

// Diagonal Gaussian over the latent space, parameterised by an encoder.
struct GaussianLatent {
    Tensor mu;      // [batch x latent]
    Tensor log_var; // [batch x latent]
};

// Two VAEs sharing a latent space: one per modality, single hidden layer in
// each encoder and decoder.
struct CadaModel {
    ad::Mlp enc_x_trunk;
    ad::DenseLayer enc_x_mu, enc_x_logvar;
    ad::Mlp enc_a_trunk;
    ad::DenseLayer enc_a_mu, enc_a_logvar;
    ad::Mlp dec_x, dec_a;

    std::size_t visual_dim() const { return enc_x_trunk.in_dim(); }
    std::size_t semantic_dim() const { return enc_a_trunk.in_dim(); }
    std::size_t latent_dim() const { return enc_x_mu.out_dim(); }
    std::vector<Tensor> params() const;
    std::vector<ad::NamedParam> named_params() const;
};

CadaModel make_cada_model(std::size_t visual_dim, std::size_t semantic_dim,
                          const CadaConfig& cfg, Rng& rng);

GaussianLatent encode(const CadaModel& m, Modality mod, const Tensor& inputs);
Tensor decode(const CadaModel& m, Modality mod, const Tensor& z);

// z = mu + exp(log_var/2) * eps, eps ~ N(0, I) supplied by the caller so
// that losses stay deterministic functions of the parameters.
Tensor reparameterize(const GaussianLatent& g, const Tensor& eps);
Tensor draw_noise(std::size_t rows, std::size_t cols, Rng& rng);

// Mean over the batch of 0.5 * sum_d(mu^2 + sigma^2 - 1 - log sigma^2).
Tensor kl_term(const GaussianLatent& g);

// Row-paired visual samples and their class embeddings.
struct Batch {
    Tensor visual;   // [batch x visual_dim]
    Tensor semantic; // [batch x semantic_dim]
};

// Per-sample distance between each modality's input and the decoding of the
// other modality's latent sample, averaged over the batch.
Tensor cross_alignment_loss(const CadaModel& m, const Batch& batch, const Tensor& z_x,
                            const Tensor& z_a, bool l2);
// Same, drawing the latent samples internally.
Tensor cross_alignment_loss(const CadaModel& m, const Batch& batch, Rng& rng,
                            bool l2 = false);

// Per-pair 2-Wasserstein distance between the two diagonal Gaussians:
// squared L2 of the mean difference plus squared Frobenius norm of the
// difference of the sqrt-covariances, averaged over the batch.
Tensor distribution_alignment_loss(const GaussianLatent& from_visual,
                                   const GaussianLatent& from_semantic);

struct CadaLosses {
    Tensor recon, kl, cross, dist, weighted_total;
};

CadaLosses total_loss(const CadaModel& m, const Batch& batch, int epoch,
                      const CadaConfig& cfg, const Tensor& eps_x, const Tensor& eps_a);

struct LossBreakdown {
    double recon = 0, kl = 0, cross = 0, dist = 0, weighted_total = 0;
};

struct CadaTrainResult {
    CadaModel model;
    std::vector<LossBreakdown> history; // one entry per epoch
};

// Trains on the training rows whose class is not held out for calibration,
// pairing each visual sample with its class embedding.
CadaTrainResult train_cada(const data::Dataset& ds, const CadaConfig& cfg);

// n_per_input reparameterized draws per input row, grouped by input; plain
// value tensor, detached from the gradient graph.
Tensor sample_latents(const CadaModel& m, Modality mod, const Tensor& inputs,
                      std::size_t n_per_input, Rng& rng);
// Encoder means only (the deterministic embedding used at prediction time).
Tensor latent_means(const CadaModel& m, Modality mod, const Tensor& inputs);

ad::Checkpoint to_checkpoint(const CadaModel& m);
CadaModel cada_from_checkpoint(const ad::Checkpoint& ckpt);

} // namespace gzsl::cada
