#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gzsl::ad {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

namespace detail {

// Node of the define-by-run graph. Operations create fresh nodes each
// forward pass; leaves (parameters, inputs) persist across passes.
struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad; // same length as data once touched by backward
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorImpl>> parents;
    // Pulls this node's grad into its parents' grads. Empty on leaves.
    std::function<void(TensorImpl&)> backprop;

    std::size_t size() const { return data.size(); }
    bool is_leaf() const { return !backprop; }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

} // namespace detail

// Dense row-major tensor of 64-bit floats, also acting as a handle into the
// gradient graph. Copies are shallow; the underlying storage is shared.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor constant(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value);
    // Validates that data matches the shape and contains no NaN/Inf.
    static Tensor from_data(Shape shape, std::vector<double> data,
                            bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const;
    std::size_t size() const;
    std::size_t dim(std::size_t axis) const;
    bool requires_grad() const;
    bool is_leaf() const;

    std::span<const double> data() const;
    // Mutable view of the values; used by optimizers to update leaf
    // parameters in place.
    std::span<double> values();
    std::span<const double> grad() const;

    double value() const;      // scalar tensors only
    double grad_value() const; // scalar tensors only
    double at(std::size_t i) const;
    double at(std::size_t row, std::size_t col) const;

    void zero_grad();

    // Internal graph handle, used by the operation layer.
    std::shared_ptr<detail::TensorImpl> impl_;
};

// Reverse-mode sweep from a scalar loss. Gradients of leaf tensors
// accumulate across calls until zeroed.
void backward(const Tensor& loss);

void zero_grad(std::vector<Tensor>& params);

} // namespace gzsl::ad
