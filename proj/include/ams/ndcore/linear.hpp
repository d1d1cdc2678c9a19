#pragma once

#include <cstddef>

#include "ams/ndcore/parameter.hpp"
#include "ams/rng.hpp"

namespace ams::nd {

/// Fully-connected layer y = W x + b with W of shape [out x in].
struct LinearLayer {
  LinearLayer() = default;
  LinearLayer(std::size_t in, std::size_t out, const std::string& name);

  /// Uniform(-scale/sqrt(in), scale/sqrt(in)) weights, zero bias.
  void init_uniform(Rng& rng, double scale = 1.0);

  std::size_t in() const { return weight.value.dim(1); }
  std::size_t out() const { return weight.value.dim(0); }
  ParameterList parameters() { return {&weight, &bias}; }

  Parameter weight;
  Parameter bias;
};

/// Accepts x of shape [in] (returns [out]) or a batch [N x in] (returns [N x out]).
Tensor linear_forward(const LinearLayer& layer, const Tensor& x);

/// Accumulates dW, db into the layer and returns dL/dx shaped like x.
Tensor linear_backward(LinearLayer& layer, const Tensor& x, const Tensor& dy);

}  // namespace ams::nd
