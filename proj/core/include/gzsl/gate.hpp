#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "gzsl/checkpoint.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/latent_space.hpp"
#include "gzsl/layers.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace gzsl::gate {

enum class DomainLabel : std::uint8_t { seen = 0, unseen = 1 };

// Binary seen/unseen classifier over latent vectors. Logits are divided by
// temperature before the softmax; temperature 1 until calibrated.
struct DomainClassifier {
    ad::Mlp mlp;
    double temperature = 1.0;
};

struct GateConfig {
    std::size_t dc_hidden = 128; // 0 means a single linear layer
    std::size_t dc_epochs = 30;
    double dc_lr = 1e-3;
    std::size_t n_unseen_draws_per_class = 200;
    // Resize the unseen draw count so both domains contribute equally many
    // rows; without it the seen side usually dominates.
    bool class_balance = true;
    std::uint64_t seed = 1;
};

struct DomainSet {
    ad::Tensor latents; // [n x latent_dim]
    std::vector<DomainLabel> labels;

    std::size_t count(DomainLabel d) const;
};

// Seen rows come from (a) one latent draw per training visual outside the
// held-out calibration classes and (b) one semantic projection per remaining
// seen class; unseen rows are repeated semantic projections of the unseen
// classes. Calibration classes are kept out entirely so they stay usable as
// pseudo-unseen data later.
DomainSet build_dc_training_set(const LatentSpace& space, const data::Dataset& ds,
                                const GateConfig& cfg, Rng& rng);

// Deterministic visual embeddings of training rows: held-out calibration
// classes labeled unseen, an equal-sized seeded subsample of the remaining
// seen classes labeled seen. Empty when the dataset has no val_classes.
DomainSet build_calibration_set(const LatentSpace& space, const data::Dataset& ds,
                                const GateConfig& cfg, Rng& rng);

DomainClassifier train_dc(const DomainSet& set, const GateConfig& cfg,
                          std::vector<double>* loss_history = nullptr);

// Fits temperature by golden-section search of the validation NLL over
// [0.05, 20] and stores it on the classifier. A degenerate validation set
// (empty or single-domain) leaves temperature at 1 with a warning.
double calibrate(DomainClassifier& dc, const DomainSet& validation);

// Row-major [n x 2] probabilities, column 0 = seen. Each row sums to 1.
std::vector<double> domain_probs(const DomainClassifier& dc, const ad::Tensor& latents);
std::pair<double, double> domain_prob(const DomainClassifier& dc, std::span<const double> z);

// score(y) = p_class(y) * p_seen for seen classes, p_class(y) * p_unseen for
// unseen ones; the cross-domain terms vanish. Pure function.
std::vector<double> gate(std::span<const double> p_class, double p_seen, double p_unseen,
                         std::span<const DomainLabel> class_domains);

ad::Checkpoint to_checkpoint(const DomainClassifier& dc);
DomainClassifier dc_from_checkpoint(const ad::Checkpoint& ckpt);

// Writes the checkpoint plus a one-line "<path>.temperature" sidecar holding
// the temperature at 17 significant digits (exact double round-trip).
void save_dc(const std::filesystem::path& path, const DomainClassifier& dc);
DomainClassifier load_dc(const std::filesystem::path& path);

} // namespace gzsl::gate
