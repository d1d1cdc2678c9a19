#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ams/ndcore/linear.hpp"
#include "ams/rng.hpp"
#include "ams/taskgen/domain.hpp"

namespace ams::meta {

using taskgen::Batch;

/// A differentiable model family addressed through a flat parameter vector.
/// Implementations must be safe to call concurrently on distinct theta.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;
  virtual std::size_t parameter_count() const = 0;
  /// Mean per-example loss at theta; writes dloss/dtheta into *grad when given.
  virtual double loss(std::span<const double> theta, const Batch& batch,
                      std::vector<double>* grad) const = 0;
};

enum class LossKind { squared_error, cross_entropy };

/// MLP with tanh hidden layers (default in -> 40 -> 40 -> out). An empty
/// hidden list gives a linear model.
class TaskModel final : public DifferentiableModel {
 public:
  TaskModel(std::size_t in, std::size_t out, LossKind loss,
            std::vector<std::size_t> hidden = {40, 40});

  static TaskModel for_suite(taskgen::Family family, int class_count,
                             std::vector<std::size_t> hidden = {40, 40});

  std::size_t parameter_count() const override { return count_; }
  double loss(std::span<const double> theta, const Batch& batch,
              std::vector<double>* grad) const override;

  /// Predictions [n x out] at theta.
  nd::Tensor predict(std::span<const double> theta, const nd::Tensor& inputs) const;

  /// Fresh parameters: uniform(+-1/sqrt(fan_in)) weights, zero biases.
  std::vector<double> initial_parameters(Rng& rng) const;

  LossKind loss_kind() const { return loss_; }
  std::size_t input_size() const { return in_; }
  std::size_t output_size() const { return out_; }
  const std::vector<std::size_t>& hidden_sizes() const { return hidden_; }

 private:
  std::vector<nd::LinearLayer> load(std::span<const double> theta) const;

  std::size_t in_;
  std::size_t out_;
  LossKind loss_;
  std::vector<std::size_t> hidden_;
  std::vector<nd::LinearLayer> shape_;
  std::size_t count_ = 0;
};

/// Flat-vector helpers shared by the meta-learning loops.
double max_abs(std::span<const double> v);
double l2_norm(std::span<const double> v);

}  // namespace ams::meta
