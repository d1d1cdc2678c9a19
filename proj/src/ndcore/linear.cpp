#include "ams/ndcore/linear.hpp"

#include <cmath>

#include "ams/error.hpp"

namespace ams::nd {

LinearLayer::LinearLayer(std::size_t in, std::size_t out, const std::string& name)
    : weight(name + ".weight", Tensor({out, in})), bias(name + ".bias", Tensor({out})) {}

void LinearLayer::init_uniform(Rng& rng, double scale) {
  const double bound = scale / std::sqrt(static_cast<double>(in()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : weight.value.values()) w = dist(rng);
  bias.value.fill(0.0);
}

namespace {

struct BatchView {
  std::size_t rows;
  std::size_t cols;
};

BatchView batch_view(const Tensor& x, std::size_t in) {
  if (x.rank() == 1 && x.dim(0) == in) return {1, in};
  if (x.rank() == 2 && x.dim(1) == in) return {x.dim(0), in};
  throw DimensionError("linear: input shape " + x.shape_string() + " incompatible with in=" +
                       std::to_string(in));
}

}  // namespace

Tensor linear_forward(const LinearLayer& layer, const Tensor& x) {
  const std::size_t in = layer.in();
  const std::size_t out = layer.out();
  const BatchView v = batch_view(x, in);
  Tensor y = x.rank() == 1 ? Tensor({out}) : Tensor({v.rows, out});
  const double* w = layer.weight.value.data();
  const double* b = layer.bias.value.data();
  const double* xs = x.data();
  double* ys = y.data();
  for (std::size_t n = 0; n < v.rows; ++n) {
    const double* xr = xs + n * in;
    double* yr = ys + n * out;
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = w + o * in;
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

Tensor linear_backward(LinearLayer& layer, const Tensor& x, const Tensor& dy) {
  const std::size_t in = layer.in();
  const std::size_t out = layer.out();
  const BatchView v = batch_view(x, in);
  if (dy.size() != v.rows * out) {
    throw DimensionError("linear backward: dy shape " + dy.shape_string() + " expected " +
                         std::to_string(v.rows) + "x" + std::to_string(out));
  }
  Tensor dx(x.shape());
  const double* w = layer.weight.value.data();
  double* dw = layer.weight.grad.data();
  double* db = layer.bias.grad.data();
  const double* xs = x.data();
  const double* dys = dy.data();
  double* dxs = dx.data();
  for (std::size_t n = 0; n < v.rows; ++n) {
    const double* xr = xs + n * in;
    const double* dyr = dys + n * out;
    double* dxr = dxs + n * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      db[o] += g;
      double* dwr = dw + o * in;
      const double* wr = w + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        dwr[i] += g * xr[i];
        dxr[i] += g * wr[i];
      }
    }
  }
  return dx;
}

}  // namespace ams::nd
