#pragma once

#include "ams/ndcore/tensor.hpp"

namespace ams::nd {

/// Softmax of a 1-D logit vector, stabilised by max subtraction.
Tensor softmax(const Tensor& logits);

/// dL/dlogits from the softmax output y and dL/dy.
Tensor softmax_backward(const Tensor& y, const Tensor& dy);

}  // namespace ams::nd
