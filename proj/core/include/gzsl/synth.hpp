#pragma once

#include <cstdint>

#include "gzsl/dataset.hpp"

namespace gzsl::data {

// Recipe for a self-contained benchmark. Per class: a semantic prototype is
// drawn, its visual cluster center is a fixed linear image of the prototype,
// and samples are the center plus isotropic Gaussian noise. Centers are
// rescaled so the closest pair sits at distance 1, which makes
// cluster_spread directly comparable across specs.
struct SynthSpec {
    std::size_t n_seen = 8;
    std::size_t n_unseen = 4;
    std::size_t visual_dim = 32;
    std::size_t semantic_dim = 8;
    std::size_t samples_per_class = 50;
    double cluster_spread = 0.1;
    // Perturbation applied to the semantic rows handed to the dataset, so
    // the observed class embeddings need not match the generating
    // prototypes exactly.
    double semantic_noise = 0.0;
    std::uint64_t seed = 0;
};

// Deterministic in spec.seed. Seen classes get samples_per_class training
// rows plus samples_per_class test rows; unseen classes get
// samples_per_class test rows. Values are quantized to float32 so that
// saving and loading reproduces the generated dataset exactly.
Dataset synth_benchmark(const SynthSpec& spec);

} // namespace gzsl::data
