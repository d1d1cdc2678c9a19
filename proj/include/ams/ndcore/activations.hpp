#pragma once

#include <string_view>

#include "ams/ndcore/tensor.hpp"

namespace ams::nd {

enum class Activation { tanh, sigmoid, relu };

double activate(double x, Activation kind);
/// Derivative expressed through the input `x` and output `y = activate(x)`.
double activate_derivative(double x, double y, Activation kind);

Tensor activate(const Tensor& x, Activation kind);
/// Returns dL/dx given the forward input, forward output and dL/dy.
Tensor activate_backward(const Tensor& x, const Tensor& y, const Tensor& dy, Activation kind);

std::string_view to_string(Activation kind);

}  // namespace ams::nd
