#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gzsl/ops.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/tensor.hpp"

namespace gzsl::ad {

enum class Activation { identity, relu, leaky_relu, sigmoid };

std::string activation_name(Activation a);

struct DenseLayer {
    Tensor weight; // [out x in]
    Tensor bias;   // [out]
    Activation activation = Activation::identity;
    double leaky_slope = 0.2;

    std::size_t in_dim() const { return weight.dim(1); }
    std::size_t out_dim() const { return weight.dim(0); }
};

// Weights drawn uniform(-sqrt(1/in), sqrt(1/in)), biases zero.
DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng,
                      double leaky_slope = 0.2);

// activation(x * W^T + b); input is [batch x in].
Tensor forward_dense(const DenseLayer& layer, const Tensor& input);

struct Mlp {
    std::vector<DenseLayer> layers;

    Tensor forward(const Tensor& input) const;
    std::size_t in_dim() const { return layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.back().out_dim(); }
};

// dims = {in, hidden..., out}; hidden layers get `hidden`, the last layer
// gets `output`.
Mlp make_mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
             Rng& rng, double leaky_slope = 0.2);

std::vector<Tensor> params_of(const DenseLayer& layer);
std::vector<Tensor> params_of(const Mlp& mlp);
void append_params(std::vector<Tensor>& out, const Mlp& mlp);
void append_params(std::vector<Tensor>& out, const DenseLayer& layer);

} // namespace gzsl::ad
