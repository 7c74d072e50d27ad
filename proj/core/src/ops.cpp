#include "gzsl/ops.hpp"

#include <cmath>

#include "gzsl/error.hpp"

namespace gzsl::ad {

namespace {

using detail::TensorImpl;

Tensor make_op(Shape shape, std::initializer_list<Tensor> inputs) {
    bool rg = false;
    for (const Tensor& t : inputs) {
        if (!t.defined()) throw ContractError("operation on a default-constructed tensor");
        if (t.requires_grad()) rg = true;
    }
    Tensor out = Tensor::zeros(std::move(shape), rg);
    if (rg) {
        for (const Tensor& t : inputs) out.impl_->parents.push_back(t.impl_);
    }
    return out;
}

void accumulate(TensorImpl& parent, std::size_t i, double v) {
    parent.grad[i] += v;
}

// Prepares grad buffers of parents that participate in the sweep.
void prep(TensorImpl& self) {
    for (auto& p : self.parents)
        if (p->requires_grad) p->ensure_grad();
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

Tensor elementwise_binary(const char* name, const Tensor& a, const Tensor& b,
                          double (*fwd)(double, double), void (*bwd)(TensorImpl&)) {
    check_same_shape(name, a, b);
    Tensor out = make_op(a.shape(), {a, b});
    const auto av = a.data();
    const auto bv = b.data();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = fwd(av[i], bv[i]);
    if (out.requires_grad()) {
        out.impl_->backprop = [bwd](TensorImpl& self) {
            prep(self);
            bwd(self);
        };
    }
    return out;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "add", a, b, [](double x, double y) { return x + y; },
        [](TensorImpl& self) {
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                if (pa.requires_grad) accumulate(pa, i, self.grad[i]);
                if (pb.requires_grad) accumulate(pb, i, self.grad[i]);
            }
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](TensorImpl& self) {
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                if (pa.requires_grad) accumulate(pa, i, self.grad[i]);
                if (pb.requires_grad) accumulate(pb, i, -self.grad[i]);
            }
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return elementwise_binary(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](TensorImpl& self) {
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                if (pa.requires_grad) accumulate(pa, i, self.grad[i] * pb.data[i]);
                if (pb.requires_grad) accumulate(pb, i, self.grad[i] * pa.data[i]);
            }
        });
}

namespace {

Tensor elementwise_unary(const Tensor& a, double (*fwd)(double),
                         double (*dfd)(double f, double x)) {
    Tensor out = make_op(a.shape(), {a});
    const auto av = a.data();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = fwd(av[i]);
    if (out.requires_grad()) {
        out.impl_->backprop = [dfd](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                accumulate(p, i, self.grad[i] * dfd(self.data[i], p.data[i]));
        };
    }
    return out;
}

} // namespace

Tensor scale(const Tensor& a, double c) {
    Tensor out = make_op(a.shape(), {a});
    const auto av = a.data();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = c * av[i];
    if (out.requires_grad()) {
        out.impl_->backprop = [c](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                accumulate(p, i, c * self.grad[i]);
        };
    }
    return out;
}

Tensor add_scalar(const Tensor& a, double c) {
    Tensor out = make_op(a.shape(), {a});
    const auto av = a.data();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + c;
    if (out.requires_grad()) {
        out.impl_->backprop = [](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                accumulate(p, i, self.grad[i]);
        };
    }
    return out;
}

Tensor relu(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double, double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    Tensor out = make_op(a.shape(), {a});
    const auto av = a.data();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] > 0.0 ? av[i] : slope * av[i];
    if (out.requires_grad()) {
        out.impl_->backprop = [slope](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            for (std::size_t i = 0; i < self.grad.size(); ++i)
                accumulate(p, i, self.grad[i] * (p.data[i] > 0.0 ? 1.0 : slope));
        };
    }
    return out;
}

Tensor sigmoid(const Tensor& a) {
    return elementwise_unary(
        a,
        [](double x) {
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            const double e = std::exp(x);
            return e / (1.0 + e);
        },
        [](double f, double) { return f * (1.0 - f); });
}

Tensor exp_of(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return std::exp(x); },
        [](double f, double) { return f; });
}

Tensor abs_of(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return std::fabs(x); },
        [](double, double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
    return elementwise_unary(
        a, [](double x) { return x * x; },
        [](double, double x) { return 2.0 * x; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = make_op({m, n}, {a, b});
    const auto av = a.data();
    const auto bv = b.data();
    auto ov = out.values();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = av[i * k + l];
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) ov[i * n + j] += ail * bv[l * n + j];
        }
    if (out.requires_grad()) {
        out.impl_->backprop = [m, k, n](TensorImpl& self) {
            prep(self);
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            if (pa.requires_grad) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double g = self.grad[i * n + j];
                        if (g == 0.0) continue;
                        for (std::size_t l = 0; l < k; ++l)
                            pa.grad[i * k + l] += g * pb.data[l * n + j];
                    }
            }
            if (pb.requires_grad) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t l = 0; l < k; ++l) {
                        const double x = pa.data[i * k + l];
                        if (x == 0.0) continue;
                        for (std::size_t j = 0; j < n; ++j)
                            pb.grad[l * n + j] += x * self.grad[i * n + j];
                    }
            }
        };
    }
    return out;
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1 ||
        x.dim(1) != weight.dim(1) || weight.dim(0) != bias.dim(0))
        throw ShapeError("affine: incompatible shapes x " + shape_str(x.shape()) +
                         ", weight " + shape_str(weight.shape()) + ", bias " +
                         shape_str(bias.shape()));
    const std::size_t batch = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
    Tensor out = make_op({batch, out_dim}, {x, weight, bias});
    const auto xv = x.data();
    const auto wv = weight.data();
    const auto bv = bias.data();
    auto ov = out.values();
    for (std::size_t s = 0; s < batch; ++s) {
        for (std::size_t o = 0; o < out_dim; ++o) ov[s * out_dim + o] = bv[o];
        for (std::size_t i = 0; i < in; ++i) {
            const double xi = xv[s * in + i];
            if (xi == 0.0) continue;
            for (std::size_t o = 0; o < out_dim; ++o)
                ov[s * out_dim + o] += xi * wv[o * in + i];
        }
    }
    if (out.requires_grad()) {
        out.impl_->backprop = [batch, in, out_dim](TensorImpl& self) {
            prep(self);
            auto& px = *self.parents[0];
            auto& pw = *self.parents[1];
            auto& pb = *self.parents[2];
            for (std::size_t s = 0; s < batch; ++s) {
                const double* g = self.grad.data() + s * out_dim;
                if (px.requires_grad) {
                    for (std::size_t o = 0; o < out_dim; ++o) {
                        if (g[o] == 0.0) continue;
                        const double* wrow = pw.data.data() + o * in;
                        for (std::size_t i = 0; i < in; ++i)
                            px.grad[s * in + i] += g[o] * wrow[i];
                    }
                }
                if (pw.requires_grad) {
                    const double* xrow = px.data.data() + s * in;
                    for (std::size_t o = 0; o < out_dim; ++o) {
                        if (g[o] == 0.0) continue;
                        double* wg = pw.grad.data() + o * in;
                        for (std::size_t i = 0; i < in; ++i) wg[i] += g[o] * xrow[i];
                    }
                }
                if (pb.requires_grad)
                    for (std::size_t o = 0; o < out_dim; ++o) pb.grad[o] += g[o];
            }
        };
    }
    return out;
}

Tensor sum_all(const Tensor& a) {
    Tensor out = make_op({1}, {a});
    double acc = 0.0;
    for (double x : a.data()) acc += x;
    out.values()[0] = acc;
    if (out.requires_grad()) {
        out.impl_->backprop = [](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            const double g = self.grad[0];
            for (double& gi : p.grad) gi += g;
        };
    }
    return out;
}

Tensor mean_all(const Tensor& a) {
    const std::size_t n = a.size();
    if (n == 0) throw ShapeError("mean_all of an empty tensor");
    Tensor out = make_op({1}, {a});
    double acc = 0.0;
    for (double x : a.data()) acc += x;
    out.values()[0] = acc / static_cast<double>(n);
    if (out.requires_grad()) {
        out.impl_->backprop = [n](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            const double g = self.grad[0] / static_cast<double>(n);
            for (double& gi : p.grad) gi += g;
        };
    }
    return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0))
        throw ShapeError("concat_cols: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    const std::size_t batch = a.dim(0), p = a.dim(1), q = b.dim(1);
    Tensor out = make_op({batch, p + q}, {a, b});
    const auto av = a.data();
    const auto bv = b.data();
    auto ov = out.values();
    for (std::size_t s = 0; s < batch; ++s) {
        for (std::size_t i = 0; i < p; ++i) ov[s * (p + q) + i] = av[s * p + i];
        for (std::size_t j = 0; j < q; ++j) ov[s * (p + q) + p + j] = bv[s * q + j];
    }
    if (out.requires_grad()) {
        out.impl_->backprop = [batch, p, q](TensorImpl& self) {
            prep(self);
            auto& pa = *self.parents[0];
            auto& pb = *self.parents[1];
            for (std::size_t s = 0; s < batch; ++s) {
                if (pa.requires_grad)
                    for (std::size_t i = 0; i < p; ++i)
                        pa.grad[s * p + i] += self.grad[s * (p + q) + i];
                if (pb.requires_grad)
                    for (std::size_t j = 0; j < q; ++j)
                        pb.grad[s * q + j] += self.grad[s * (p + q) + p + j];
            }
        };
    }
    return out;
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<std::uint32_t>& labels) {
    if (logits.rank() != 2)
        throw ShapeError("softmax_cross_entropy expects [batch x classes] logits, got " +
                         shape_str(logits.shape()));
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    if (labels.size() != batch)
        throw ContractError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                            " labels for batch of " + std::to_string(batch));
    for (std::uint32_t y : labels)
        if (y >= classes)
            throw ContractError("softmax_cross_entropy: label " + std::to_string(y) +
                                " outside " + std::to_string(classes) + " classes");

    std::vector<double> probs = softmax_rows(logits);
    const auto lv = logits.data();
    double nll = 0.0;
    for (std::size_t s = 0; s < batch; ++s) {
        double m = lv[s * classes];
        for (std::size_t c = 1; c < classes; ++c) m = std::max(m, lv[s * classes + c]);
        double lse = 0.0;
        for (std::size_t c = 0; c < classes; ++c) lse += std::exp(lv[s * classes + c] - m);
        nll += m + std::log(lse) - lv[s * classes + labels[s]];
    }

    Tensor out = make_op({1}, {logits});
    out.values()[0] = nll / static_cast<double>(batch);
    if (out.requires_grad()) {
        out.impl_->backprop = [batch, classes, probs = std::move(probs),
                               labels](TensorImpl& self) {
            prep(self);
            auto& p = *self.parents[0];
            if (!p.requires_grad) return;
            const double g = self.grad[0] / static_cast<double>(batch);
            for (std::size_t s = 0; s < batch; ++s)
                for (std::size_t c = 0; c < classes; ++c) {
                    double d = probs[s * classes + c];
                    if (c == labels[s]) d -= 1.0;
                    p.grad[s * classes + c] += g * d;
                }
        };
    }
    return out;
}

std::vector<double> softmax_rows(const Tensor& logits) {
    if (logits.rank() != 2)
        throw ShapeError("softmax_rows expects a rank-2 tensor, got " +
                         shape_str(logits.shape()));
    const std::size_t batch = logits.dim(0), classes = logits.dim(1);
    const auto lv = logits.data();
    std::vector<double> probs(batch * classes);
    for (std::size_t s = 0; s < batch; ++s) {
        double m = lv[s * classes];
        for (std::size_t c = 1; c < classes; ++c) m = std::max(m, lv[s * classes + c]);
        double z = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double e = std::exp(lv[s * classes + c] - m);
            probs[s * classes + c] = e;
            z += e;
        }
        for (std::size_t c = 0; c < classes; ++c) probs[s * classes + c] /= z;
    }
    return probs;
}

} // namespace gzsl::ad
