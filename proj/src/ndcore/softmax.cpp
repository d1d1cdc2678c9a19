#include "ams/ndcore/softmax.hpp"

#include <algorithm>
#include <cmath>

#include "ams/error.hpp"

namespace ams::nd {

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 1 || logits.empty()) {
    throw DimensionError("softmax expects a non-empty 1-D tensor, got " + logits.shape_string());
  }
  const auto v = logits.values();
  const double mx = *std::max_element(v.begin(), v.end());
  Tensor y(logits.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    y[i] = std::exp(v[i] - mx);
    total += y[i];
  }
  for (double& p : y.values()) p /= total;
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy) {
  if (!y.same_shape(dy)) {
    throw DimensionError("softmax backward: shape mismatch " + y.shape_string() + " vs " +
                         dy.shape_string());
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  Tensor dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (dy[i] - dot);
  return dx;
}

}  // namespace ams::nd
