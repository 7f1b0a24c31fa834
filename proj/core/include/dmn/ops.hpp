#ifndef DMN_OPS_HPP_
#define DMN_OPS_HPP_

#include <vector>

#include "dmn/tensor.hpp"

// Differentiable primitives. Elementwise binaries accept equal shapes or a
// second operand whose shape (leading 1s stripped) is a suffix of the first
// operand's shape; either side may be the broadcast one.
namespace dmn::ad {

// [m,k] x [k,n] -> [m,n]; [m,k] x [k] -> [m].
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor clamp_min(const Tensor& a, double floor);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

// Full reductions; result shape {1}.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor max(const Tensor& a);

Tensor softmax(const Tensor& a, int axis = -1);
Tensor log_softmax(const Tensor& a, int axis = -1);

Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, int axis);
// Elements [begin, end) along axis.
Tensor slice(const Tensor& a, int axis, std::size_t begin, std::size_t end);

}  // namespace dmn::ad

#endif  // DMN_OPS_HPP_
