#include "gzsl/layers.hpp"

#include <cmath>

#include "gzsl/error.hpp"

namespace gzsl::ad {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act, Rng& rng,
                      double leaky_slope) {
    if (in == 0 || out == 0)
        throw ContractError("make_dense: zero-sized layer " + std::to_string(in) + "->" +
                            std::to_string(out));
    DenseLayer layer;
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    layer.weight = Tensor::zeros({out, in}, true);
    rng.fill_uniform(layer.weight.values(), -bound, bound);
    layer.bias = Tensor::zeros({out}, true);
    layer.activation = act;
    layer.leaky_slope = leaky_slope;
    return layer;
}

Tensor forward_dense(const DenseLayer& layer, const Tensor& input) {
    if (input.rank() != 2 || input.dim(1) != layer.in_dim())
        throw ShapeError("forward_dense: input " + shape_str(input.shape()) +
                         " does not match weight " + shape_str(layer.weight.shape()));
    Tensor pre = affine(input, layer.weight, layer.bias);
    switch (layer.activation) {
        case Activation::identity: return pre;
        case Activation::relu: return relu(pre);
        case Activation::leaky_relu: return leaky_relu(pre, layer.leaky_slope);
        case Activation::sigmoid: return sigmoid(pre);
    }
    return pre;
}

Tensor Mlp::forward(const Tensor& input) const {
    if (layers.empty()) throw ContractError("forward on an empty Mlp");
    Tensor h = input;
    for (const DenseLayer& layer : layers) h = forward_dense(layer, h);
    return h;
}

Mlp make_mlp(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
             Rng& rng, double leaky_slope) {
    if (dims.size() < 2) throw ContractError("make_mlp needs at least input and output dims");
    Mlp mlp;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const bool last = (i + 2 == dims.size());
        mlp.layers.push_back(
            make_dense(dims[i], dims[i + 1], last ? output : hidden, rng, leaky_slope));
    }
    return mlp;
}

std::vector<Tensor> params_of(const DenseLayer& layer) {
    return {layer.weight, layer.bias};
}

std::vector<Tensor> params_of(const Mlp& mlp) {
    std::vector<Tensor> out;
    append_params(out, mlp);
    return out;
}

void append_params(std::vector<Tensor>& out, const DenseLayer& layer) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
}

void append_params(std::vector<Tensor>& out, const Mlp& mlp) {
    for (const DenseLayer& layer : mlp.layers) append_params(out, layer);
}

} // namespace gzsl::ad
