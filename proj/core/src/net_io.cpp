#include "gzsl/net_io.hpp"

#include "gzsl/error.hpp"

namespace gzsl::ad {

void checkpoint_add_dense(Checkpoint& ckpt, const std::string& prefix, const DenseLayer& layer) {
    ckpt.add(prefix + ".w", layer.weight);
    ckpt.add(prefix + ".b", layer.bias);
}

void checkpoint_add_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp& mlp) {
    for (std::size_t i = 0; i < mlp.layers.size(); ++i)
        checkpoint_add_dense(ckpt, prefix + "." + std::to_string(i), mlp.layers[i]);
}

DenseLayer dense_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix,
                                 Activation act, double leaky_slope) {
    DenseLayer layer;
    layer.weight = ckpt.require(prefix + ".w");
    layer.bias = ckpt.require(prefix + ".b");
    if (layer.weight.rank() != 2 || layer.bias.rank() != 1 ||
        layer.weight.dim(0) != layer.bias.dim(0))
        throw DataError("checkpoint arrays for '" + prefix + "' do not form a dense layer: " +
                        shape_str(layer.weight.shape()) + " / " + shape_str(layer.bias.shape()));
    layer.activation = act;
    layer.leaky_slope = leaky_slope;
    return layer;
}

Mlp mlp_from_checkpoint(const Checkpoint& ckpt, const std::string& prefix, Activation hidden,
                        Activation output, double leaky_slope) {
    Mlp mlp;
    for (std::size_t i = 0;; ++i) {
        const std::string layer_prefix = prefix + "." + std::to_string(i);
        if (ckpt.find(layer_prefix + ".w") == nullptr) break;
        mlp.layers.push_back(dense_from_checkpoint(ckpt, layer_prefix, hidden, leaky_slope));
    }
    if (mlp.layers.empty())
        throw DataError("checkpoint has no layers under prefix '" + prefix + "'");
    mlp.layers.back().activation = output;
    for (std::size_t i = 1; i < mlp.layers.size(); ++i) {
        if (mlp.layers[i].in_dim() != mlp.layers[i - 1].out_dim())
            throw DataError("checkpoint layers under '" + prefix + "' do not chain: layer " +
                            std::to_string(i - 1) + " emits " +
                            std::to_string(mlp.layers[i - 1].out_dim()) + ", layer " +
                            std::to_string(i) + " expects " +
                            std::to_string(mlp.layers[i].in_dim()));
    }
    return mlp;
}

} // namespace gzsl::ad
