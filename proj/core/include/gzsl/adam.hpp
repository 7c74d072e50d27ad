#pragma once

#include <cstdint>
#include <vector>

#include "gzsl/tensor.hpp"

namespace gzsl::ad {

// Adam with bias correction. Moment buffers are positionally matched to the
// parameter list the state was created for.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

AdamState make_adam(const std::vector<Tensor>& params, double lr, double beta1 = 0.9,
                    double beta2 = 0.999, double epsilon = 1e-8);

// In-place update from current grads; grads are left untouched so the caller
// decides when to zero them.
void adam_step(std::vector<Tensor>& params, AdamState& state);

// Clamps every parameter entry to [-c, c].
void clip_weights(std::vector<Tensor>& params, double c);

} // namespace gzsl::ad
