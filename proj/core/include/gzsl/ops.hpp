#pragma once

#include <cstdint>
#include <vector>

#include "gzsl/tensor.hpp"

namespace gzsl::ad {

// Elementwise; operands must have identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);

Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor sigmoid(const Tensor& a);
Tensor exp_of(const Tensor& a);
Tensor abs_of(const Tensor& a);
Tensor square(const Tensor& a);

// a: [m x k], b: [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);

// x: [batch x in], weight: [out x in], bias: [out] -> [batch x out]
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor sum_all(const Tensor& a);  // -> scalar
Tensor mean_all(const Tensor& a); // -> scalar

// a: [batch x p], b: [batch x q] -> [batch x (p+q)]
Tensor concat_cols(const Tensor& a, const Tensor& b);

// logits: [batch x classes]; returns mean negative log-likelihood.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<std::uint32_t>& labels);

// Row-wise softmax of a [batch x classes] tensor, computed outside the
// gradient graph (inference helper).
std::vector<double> softmax_rows(const Tensor& logits);

} // namespace gzsl::ad
