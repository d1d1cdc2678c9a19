#include "ams/ndcore/lstm.hpp"

#include <cmath>

#include "ams/error.hpp"
#include "ams/ndcore/activations.hpp"

namespace ams::nd {

LstmCell::LstmCell(std::size_t input_size, std::size_t hidden_size, const std::string& name)
    : w_ih(name + ".w_ih", Tensor({4 * hidden_size, input_size})),
      w_hh(name + ".w_hh", Tensor({4 * hidden_size, hidden_size})),
      bias(name + ".bias", Tensor({4 * hidden_size})) {}

void LstmCell::init_uniform(Rng& rng, double scale) {
  const double bound = scale / std::sqrt(static_cast<double>(hidden_size()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : w_ih.value.values()) w = dist(rng);
  for (double& w : w_hh.value.values()) w = dist(rng);
  bias.value.fill(0.0);
}

namespace {

void require_vector(const Tensor& t, std::size_t n, const char* what) {
  if (t.rank() != 1 || t.dim(0) != n) {
    throw DimensionError(std::string("lstm: ") + what + " has shape " + t.shape_string() +
                         ", expected [" + std::to_string(n) + "]");
  }
}

}  // namespace

LstmStep lstm_forward(const LstmCell& cell, const Tensor& x, const Tensor& h_prev,
                      const Tensor& c_prev) {
  const std::size_t in = cell.input_size();
  const std::size_t hid = cell.hidden_size();
  require_vector(x, in, "input");
  require_vector(h_prev, hid, "h_prev");
  require_vector(c_prev, hid, "c_prev");

  std::vector<double> z(cell.bias.value.values().begin(), cell.bias.value.values().end());
  const double* wi = cell.w_ih.value.data();
  const double* wh = cell.w_hh.value.data();
  for (std::size_t r = 0; r < 4 * hid; ++r) {
    double acc = 0.0;
    const double* wir = wi + r * in;
    for (std::size_t j = 0; j < in; ++j) acc += wir[j] * x[j];
    const double* whr = wh + r * hid;
    for (std::size_t j = 0; j < hid; ++j) acc += whr[j] * h_prev[j];
    z[r] += acc;
  }

  LstmStep step;
  LstmCache& k = step.cache;
  k.x = x;
  k.h_prev = h_prev;
  k.c_prev = c_prev;
  k.in_gate = Tensor({hid});
  k.forget_gate = Tensor({hid});
  k.candidate = Tensor({hid});
  k.out_gate = Tensor({hid});
  k.c = Tensor({hid});
  k.tanh_c = Tensor({hid});
  step.h = Tensor({hid});
  for (std::size_t j = 0; j < hid; ++j) {
    k.in_gate[j] = activate(z[j], Activation::sigmoid);
    k.forget_gate[j] = activate(z[hid + j], Activation::sigmoid);
    k.candidate[j] = std::tanh(z[2 * hid + j]);
    k.out_gate[j] = activate(z[3 * hid + j], Activation::sigmoid);
    k.c[j] = k.forget_gate[j] * c_prev[j] + k.in_gate[j] * k.candidate[j];
    k.tanh_c[j] = std::tanh(k.c[j]);
    step.h[j] = k.out_gate[j] * k.tanh_c[j];
  }
  step.c = k.c;
  step.y = step.h;
  return step;
}

LstmGrads lstm_backward(LstmCell& cell, const LstmCache& k, const Tensor& dh, const Tensor& dc) {
  const std::size_t in = cell.input_size();
  const std::size_t hid = cell.hidden_size();
  require_vector(dh, hid, "dh");
  require_vector(dc, hid, "dc");

  LstmGrads g{Tensor({in}), Tensor({hid}), Tensor({hid})};
  std::vector<double> dz(4 * hid);
  for (std::size_t j = 0; j < hid; ++j) {
    const double i = k.in_gate[j];
    const double f = k.forget_gate[j];
    const double cand = k.candidate[j];
    const double o = k.out_gate[j];
    const double tc = k.tanh_c[j];
    const double dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
    dz[j] = dct * cand * i * (1.0 - i);
    dz[hid + j] = dct * k.c_prev[j] * f * (1.0 - f);
    dz[2 * hid + j] = dct * i * (1.0 - cand * cand);
    dz[3 * hid + j] = dh[j] * tc * o * (1.0 - o);
    g.dc_prev[j] = dct * f;
  }

  const double* wi = cell.w_ih.value.data();
  const double* wh = cell.w_hh.value.data();
  double* dwi = cell.w_ih.grad.data();
  double* dwh = cell.w_hh.grad.data();
  double* db = cell.bias.grad.data();
  for (std::size_t r = 0; r < 4 * hid; ++r) {
    const double d = dz[r];
    db[r] += d;
    if (d == 0.0) continue;
    double* dwir = dwi + r * in;
    const double* wir = wi + r * in;
    for (std::size_t j = 0; j < in; ++j) {
      dwir[j] += d * k.x[j];
      g.dx[j] += d * wir[j];
    }
    double* dwhr = dwh + r * hid;
    const double* whr = wh + r * hid;
    for (std::size_t j = 0; j < hid; ++j) {
      dwhr[j] += d * k.h_prev[j];
      g.dh_prev[j] += d * whr[j];
    }
  }
  return g;
}

}  // namespace ams::nd
