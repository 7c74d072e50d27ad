#include "gzsl/tensor.hpp"

#include <cmath>
#include <unordered_set>

#include "gzsl/error.hpp"

namespace gzsl::ad {

std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

static std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

static std::shared_ptr<detail::TensorImpl> make_impl(Shape shape, bool requires_grad) {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    impl->data.assign(shape_numel(impl->shape), 0.0);
    return impl;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    Tensor t;
    t.impl_ = make_impl(std::move(shape), requires_grad);
    return t;
}

Tensor Tensor::constant(Shape shape, double value, bool requires_grad) {
    if (!std::isfinite(value))
        throw NumericError("tensor construction rejected: non-finite fill value");
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& x : t.impl_->data) x = value;
    return t;
}

Tensor Tensor::scalar(double value) {
    return constant({1}, value);
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    const std::size_t n = shape_numel(shape);
    if (data.size() != n)
        throw ShapeError("tensor construction: " + std::to_string(data.size()) +
                         " values do not fill shape " + shape_str(shape));
    for (double x : data) {
        if (!std::isfinite(x))
            throw NumericError("tensor construction rejected: non-finite value for shape " +
                               shape_str(shape));
    }
    Tensor t;
    t.impl_ = std::make_shared<detail::TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->data = std::move(data);
    t.impl_->requires_grad = requires_grad;
    return t;
}

static const detail::TensorImpl& deref(const std::shared_ptr<detail::TensorImpl>& p) {
    if (!p) throw ContractError("operation on a default-constructed tensor");
    return *p;
}

const Shape& Tensor::shape() const { return deref(impl_).shape; }
std::size_t Tensor::rank() const { return deref(impl_).shape.size(); }
std::size_t Tensor::size() const { return deref(impl_).data.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size())
        throw ShapeError("dim axis " + std::to_string(axis) + " out of range for " + shape_str(s));
    return s[axis];
}

bool Tensor::requires_grad() const { return deref(impl_).requires_grad; }
bool Tensor::is_leaf() const { return deref(impl_).is_leaf(); }

std::span<const double> Tensor::data() const {
    const auto& impl = deref(impl_);
    return {impl.data.data(), impl.data.size()};
}

std::span<double> Tensor::values() {
    deref(impl_);
    return {impl_->data.data(), impl_->data.size()};
}

std::span<const double> Tensor::grad() const {
    auto& impl = const_cast<detail::TensorImpl&>(deref(impl_));
    impl.ensure_grad();
    return {impl.grad.data(), impl.grad.size()};
}

double Tensor::value() const {
    if (size() != 1)
        throw ShapeError("value() on non-scalar tensor " + shape_str(shape()));
    return impl_->data[0];
}

double Tensor::grad_value() const {
    if (size() != 1)
        throw ShapeError("grad_value() on non-scalar tensor " + shape_str(shape()));
    return grad()[0];
}

double Tensor::at(std::size_t i) const {
    const auto& impl = deref(impl_);
    if (i >= impl.data.size())
        throw ShapeError("index " + std::to_string(i) + " out of range for " +
                         shape_str(impl.shape));
    return impl.data[i];
}

double Tensor::at(std::size_t row, std::size_t col) const {
    const auto& impl = deref(impl_);
    if (impl.shape.size() != 2)
        throw ShapeError("2-d index into tensor of shape " + shape_str(impl.shape));
    if (row >= impl.shape[0] || col >= impl.shape[1])
        throw ShapeError("index (" + std::to_string(row) + "," + std::to_string(col) +
                         ") out of range for " + shape_str(impl.shape));
    return impl.data[row * impl.shape[1] + col];
}

void Tensor::zero_grad() {
    auto& impl = const_cast<detail::TensorImpl&>(deref(impl_));
    impl.grad.assign(impl.data.size(), 0.0);
}

void zero_grad(std::vector<Tensor>& params) {
    for (Tensor& p : params) p.zero_grad();
}

void backward(const Tensor& loss) {
    if (!loss.defined())
        throw ContractError("backward on a default-constructed tensor");
    if (loss.size() != 1)
        throw ContractError("backward requires a scalar loss, got " + shape_str(loss.shape()));
    if (!loss.requires_grad())
        throw ContractError("backward on a tensor that does not require gradients");

    // Iterative post-order DFS to get a topological order of the subgraph.
    std::vector<detail::TensorImpl*> order;
    std::unordered_set<detail::TensorImpl*> seen;
    struct Frame {
        detail::TensorImpl* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({loss.impl_.get(), 0});
    seen.insert(loss.impl_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            detail::TensorImpl* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    // Interior grads restart at zero every sweep; leaf grads accumulate.
    for (detail::TensorImpl* node : order) {
        if (!node->is_leaf()) node->grad.assign(node->data.size(), 0.0);
        else node->ensure_grad();
    }
    loss.impl_->grad[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::TensorImpl* node = *it;
        if (node->backprop) node->backprop(*node);
    }
}

} // namespace gzsl::ad
