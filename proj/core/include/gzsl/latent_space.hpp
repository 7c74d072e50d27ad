#pragma once

#include <functional>

#include "gzsl/cada.hpp"
#include "gzsl/cycle.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace gzsl {

// Uniform view over the space a pipeline classifies in. The VAE family
// embeds both modalities into the shared latent space; the WGAN family works
// directly in feature space, so visual rows pass through unchanged there.
struct LatentSpace {
    std::size_t latent_dim = 0;
    // Deterministic embedding of visual rows, used at prediction time.
    std::function<ad::Tensor(const ad::Tensor&)> embed_visual;
    // n stochastic rows per input visual row, grouped by input.
    std::function<ad::Tensor(const ad::Tensor&, std::size_t, Rng&)> sample_visual;
    // n stochastic rows per semantic row (reparameterization noise for the
    // VAE, generator noise for the WGAN), grouped by input.
    std::function<ad::Tensor(const ad::Tensor&, std::size_t, Rng&)> sample_semantic;
};

// Both factories capture the model by value; the returned view stays valid
// on its own (tensor storage is shared, not copied).
LatentSpace latent_space_of(const cada::CadaModel& m);
LatentSpace latent_space_of(const cycle::CycleModel& m);

} // namespace gzsl
