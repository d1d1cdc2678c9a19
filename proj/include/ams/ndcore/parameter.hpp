#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ams/ndcore/tensor.hpp"

namespace ams::nd {

/// A trainable tensor with an additive gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string id, Tensor value)
      : id(std::move(id)), value(std::move(value)), grad(this->value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
  std::size_t size() const { return value.size(); }

  std::string id;
  Tensor value;
  Tensor grad;
};

using ParameterList = std::vector<Parameter*>;

inline std::size_t total_size(const ParameterList& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->size();
  return n;
}

inline void zero_grads(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace ams::nd
