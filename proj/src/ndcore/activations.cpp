#include "ams/ndcore/activations.hpp"

#include <cmath>

#include "ams/error.hpp"

namespace ams::nd {

double activate(double x, Activation kind) {
  switch (kind) {
    case Activation::tanh:
      return std::tanh(x);
    case Activation::sigmoid:
      // Branching keeps exp() from overflowing for large |x|.
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      else {
        const double e = std::exp(x);
        return e / (1.0 + e);
      }
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
  }
  return x;
}

double activate_derivative(double x, double y, Activation kind) {
  switch (kind) {
    case Activation::tanh:
      return 1.0 - y * y;
    case Activation::sigmoid:
      return y * (1.0 - y);
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

Tensor activate(const Tensor& x, Activation kind) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = activate(x[i], kind);
  return y;
}

Tensor activate_backward(const Tensor& x, const Tensor& y, const Tensor& dy, Activation kind) {
  if (!x.same_shape(y) || !x.same_shape(dy)) {
    throw DimensionError("activation backward: shape mismatch " + x.shape_string() + " vs " +
                         dy.shape_string());
  }
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = dy[i] * activate_derivative(x[i], y[i], kind);
  return dx;
}

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::relu:
      return "relu";
  }
  return "?";
}

}  // namespace ams::nd
