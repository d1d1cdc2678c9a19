#pragma once

#include <cstddef>

#include "ams/ndcore/parameter.hpp"
#include "ams/rng.hpp"

namespace ams::nd {

/// Feed-forward (additive) attention over K per-item feature rows u_k:
///   e_k = v . tanh(W u_k + b),  a = softmax(e),
///   context = [a_1 u_1, ..., a_K u_K]  (length K * F).
/// Keeping every weighted row instead of summing them preserves which item
/// each feature came from.
struct AttentionUnit {
  AttentionUnit() = default;
  AttentionUnit(std::size_t feature_size, std::size_t attention_size, const std::string& name);

  void init_uniform(Rng& rng, double scale = 1.0);

  std::size_t feature_size() const { return weight.value.dim(1); }
  std::size_t attention_size() const { return weight.value.dim(0); }
  ParameterList parameters() { return {&weight, &bias, &score}; }

  Parameter weight;  // [A x F]
  Parameter bias;    // [A]
  Parameter score;   // [A]
};

struct AttentionCache {
  Tensor features;  // [K x F]
  Tensor hidden;    // [K x A], tanh outputs
  Tensor weights;   // [K]
};

struct AttentionOutput {
  Tensor context;  // [K * F]
  Tensor weights;  // [K]
  AttentionCache cache;
};

AttentionOutput attention_forward(const AttentionUnit& unit, const Tensor& features);

/// Accumulates parameter gradients and returns dL/dfeatures [K x F].
Tensor attention_backward(AttentionUnit& unit, const AttentionCache& cache, const Tensor& dcontext);

}  // namespace ams::nd
