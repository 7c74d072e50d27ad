#pragma once

#include <string>

#include "gzsl/checkpoint.hpp"
#include "gzsl/layers.hpp"

namespace gzsl::ad {

// Layer <-> checkpoint plumbing shared by the model modules. A standalone
// dense layer owns "<prefix>.w" / "<prefix>.b"; an Mlp owns
// "<prefix>.0.w", "<prefix>.0.b", "<prefix>.1.w", ...

void checkpoint_add_dense(Checkpoint& ckpt, const std::string& prefix, const DenseLayer& layer);
void checkpoint_add_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp& mlp);

DenseLayer dense_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix,
                                 Activation act, double leaky_slope = 0.2);
Mlp mlp_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix, Activation hidden,
                        Activation output, double leaky_slope = 0.2);

} // namespace gzsl::ad
