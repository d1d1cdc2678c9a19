#pragma once

#include <cstddef>

#include "ams/ndcore/parameter.hpp"
#include "ams/rng.hpp"

namespace ams::nd {

/// Single LSTM cell. Gate rows are stacked in the order input, forget,
/// candidate, output inside the [4H x I] and [4H x H] weight matrices.
struct LstmCell {
  LstmCell() = default;
  LstmCell(std::size_t input_size, std::size_t hidden_size, const std::string& name);

  void init_uniform(Rng& rng, double scale = 1.0);

  std::size_t input_size() const { return w_ih.value.dim(1); }
  std::size_t hidden_size() const { return w_hh.value.dim(1); }
  ParameterList parameters() { return {&w_ih, &w_hh, &bias}; }

  Parameter w_ih;
  Parameter w_hh;
  Parameter bias;
};

struct LstmCache {
  Tensor x, h_prev, c_prev;
  Tensor in_gate, forget_gate, candidate, out_gate;
  Tensor c, tanh_c;
};

struct LstmStep {
  Tensor y;  // equal to h
  Tensor h;
  Tensor c;
  LstmCache cache;
};

struct LstmGrads {
  Tensor dx, dh_prev, dc_prev;
};

LstmStep lstm_forward(const LstmCell& cell, const Tensor& x, const Tensor& h_prev,
                      const Tensor& c_prev);

/// `dh` and `dc` are the upstream gradients w.r.t. the step's h and c.
LstmGrads lstm_backward(LstmCell& cell, const LstmCache& cache, const Tensor& dh,
                        const Tensor& dc);

}  // namespace ams::nd
