#include "ams/metalearn/task_model.hpp"

#include <algorithm>
#include <cmath>

#include "ams/error.hpp"
#include "ams/ndcore/activations.hpp"

namespace ams::meta {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TaskModel::TaskModel(std::size_t in, std::size_t out, LossKind loss, std::vector<std::size_t> hidden)
    : in_(in), out_(out), loss_(loss), hidden_(std::move(hidden)) {
  std::size_t prev = in_;
  for (std::size_t i = 0; i <= hidden_.size(); ++i) {
    const std::size_t next = i < hidden_.size() ? hidden_[i] : out_;
    shape_.emplace_back(prev, next, "task.l" + std::to_string(i));
    count_ += prev * next + next;
    prev = next;
  }
}

TaskModel TaskModel::for_suite(taskgen::Family family, int class_count,
                               std::vector<std::size_t> hidden) {
  const LossKind loss =
      family == taskgen::Family::sinusoid ? LossKind::squared_error : LossKind::cross_entropy;
  return TaskModel(taskgen::input_dim(family), taskgen::output_dim(family, class_count), loss,
                   std::move(hidden));
}

std::vector<nd::LinearLayer> TaskModel::load(std::span<const double> theta) const {
  if (theta.size() != count_) {
    throw DimensionError("task model expects " + std::to_string(count_) + " parameters, got " +
                         std::to_string(theta.size()));
  }
  std::vector<nd::LinearLayer> layers = shape_;
  std::size_t off = 0;
  for (nd::LinearLayer& l : layers) {
    for (nd::Parameter* p : l.parameters()) {
      std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(off), p->size(), p->value.data());
      off += p->size();
    }
  }
  return layers;
}

std::vector<double> TaskModel::initial_parameters(Rng& rng) const {
  std::vector<nd::LinearLayer> layers = shape_;
  std::vector<double> theta;
  theta.reserve(count_);
  for (nd::LinearLayer& l : layers) {
    l.init_uniform(rng);
    for (nd::Parameter* p : l.parameters()) {
      theta.insert(theta.end(), p->value.values().begin(), p->value.values().end());
    }
  }
  return theta;
}

nd::Tensor TaskModel::predict(std::span<const double> theta, const nd::Tensor& inputs) const {
  const std::vector<nd::LinearLayer> layers = load(theta);
  nd::Tensor a = inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    a = nd::linear_forward(layers[i], a);
    if (i + 1 < layers.size()) a = nd::activate(a, nd::Activation::tanh);
  }
  return a;
}

double TaskModel::loss(std::span<const double> theta, const Batch& batch,
                       std::vector<double>* grad) const {
  const std::size_t n = batch.rows();
  if (n == 0) throw DimensionError("task model loss on an empty batch");
  std::vector<nd::LinearLayer> layers = load(theta);

  // Forward, keeping each layer's input and each hidden pre-activation.
  std::vector<nd::Tensor> inputs;
  std::vector<nd::Tensor> pre;
  inputs.reserve(layers.size());
  nd::Tensor a = batch.inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    inputs.push_back(a);
    nd::Tensor z = nd::linear_forward(layers[i], a);
    if (i + 1 < layers.size()) {
      a = nd::activate(z, nd::Activation::tanh);
      pre.push_back(std::move(z));
    } else {
      a = std::move(z);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  nd::Tensor dout(a.shape());
  double total = 0.0;
  if (loss_ == LossKind::squared_error) {
    if (!batch.targets.same_shape(a)) {
      throw DimensionError("targets " + batch.targets.shape_string() + " vs outputs " +
                           a.shape_string());
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double r = a[i] - batch.targets[i];
      total += r * r;
      dout[i] = 2.0 * r * inv_n;
    }
  } else {
    if (batch.labels.size() != n) throw DimensionError("classification batch without labels");
    const std::size_t c = out_;
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = a.data() + r * c;
      const double mx = *std::max_element(row, row + c);
      double z = 0.0;
      for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
      const double log_z = mx + std::log(z);
      const auto y = static_cast<std::size_t>(batch.labels[r]);
      if (y >= c) throw IndexError("class label out of range");
      total += log_z - row[y];
      for (std::size_t j = 0; j < c; ++j) {
        const double p = std::exp(row[j] - log_z);
        dout[r * c + j] = (p - (j == y ? 1.0 : 0.0)) * inv_n;
      }
    }
  }
  const double loss = total * inv_n;
  if (!std::isfinite(loss)) throw NumericError("non-finite task loss");
  if (grad == nullptr) return loss;

  nd::Tensor d = std::move(dout);
  for (std::size_t i = layers.size(); i-- > 0;) {
    d = nd::linear_backward(layers[i], inputs[i], d);
    if (i > 0) d = nd::activate_backward(pre[i - 1], inputs[i], d, nd::Activation::tanh);
  }
  grad->assign(count_, 0.0);
  std::size_t off = 0;
  for (nd::LinearLayer& l : layers) {
    for (nd::Parameter* p : l.parameters()) {
      std::copy(p->grad.values().begin(), p->grad.values().end(),
                grad->begin() + static_cast<std::ptrdiff_t>(off));
      off += p->size();
    }
  }
  return loss;
}

}  // namespace ams::meta
