#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ams/metalearn/task_model.hpp"
#include "ams/ndcore/optim.hpp"
#include "ams/ndcore/parameter.hpp"
#include "ams/taskgen/domain.hpp"

namespace ams::meta {

enum class Variant { maml, fomaml, reptile, mtl };
enum class OuterOptimizer { sgd, adam };
/// Serial loops are the reference; parallel runs tasks under OpenMP with the
/// same fixed-order reduction, so both produce bit-identical results.
enum class Execution { serial, parallel };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
std::string to_string(OuterOptimizer o);
OuterOptimizer optimizer_from_string(const std::string& s);

struct MetaConfig {
  Variant variant = Variant::maml;
  double alpha = 0.01;
  int inner_steps = 1;
  double beta = 0.001;
  int meta_batch = 3;  // M
  OuterOptimizer optimizer = OuterOptimizer::adam;
  double hvp_eps = 1e-4;

  /// Throws ConfigError on alpha <= 0, beta <= 0, inner_steps < 0, M < 1.
  void validate() const;
  friend bool operator==(const MetaConfig&, const MetaConfig&) = default;
};

struct MetaBatchResult {
  std::vector<double> losses;  // per task, in task order
  std::vector<int> domain_ids;
  double grad_norm = 0.0;
};

/// `steps` gradient-descent steps on the mean support loss. Theta is not modified.
std::vector<double> inner_adapt(const DifferentiableModel& model, std::span<const double> theta,
                                const Batch& support, double alpha, int steps);

double query_loss(const DifferentiableModel& model, std::span<const double> adapted,
                  const Batch& query);

/// Central-difference Hessian-vector product of the batch loss at theta:
///   H v ~= |v| (g(theta + r u) - g(theta - r u)) / (2 r),  u = v / |v|,
///   r = hvp_eps * (1 + |theta|_inf).
std::vector<double> hessian_vector_product(const DifferentiableModel& model,
                                           std::span<const double> theta, const Batch& batch,
                                           std::span<const double> v, double hvp_eps);

/// One task's share of the outer update. `grad` is the descent direction fed
/// to the outer optimizer (for Reptile, theta - theta').
struct TaskContribution {
  double loss = 0.0;
  std::vector<double> grad;
};

TaskContribution task_contribution(const DifferentiableModel& model, std::span<const double> theta,
                                   const taskgen::TaskInstance& task, const MetaConfig& cfg);

/// Outer gradient of sum_j Q_j before it is applied. Reptile returns the
/// mean of (theta - theta'_j); the other variants return the sum over tasks.
/// Reduction runs in ascending domain-id order.
MetaBatchResult outer_gradient(const DifferentiableModel& model, std::span<const double> theta,
                               std::span<const taskgen::TaskInstance> tasks, const MetaConfig& cfg,
                               std::vector<double>& grad, Execution exec);

/// Owns theta (as a single flat Parameter) and the outer optimizer state.
class MetaLearner {
 public:
  MetaLearner(std::shared_ptr<const DifferentiableModel> model, std::vector<double> theta,
              MetaConfig cfg);

  /// One outer update from exactly M tasks.
  MetaBatchResult meta_step(std::span<const taskgen::TaskInstance> tasks,
                            Execution exec = Execution::parallel);

  std::span<const double> theta() const { return theta_.value.values(); }
  void set_theta(std::span<const double> theta);
  const DifferentiableModel& model() const { return *model_; }
  const MetaConfig& config() const { return cfg_; }
  const nd::AdamState& optimizer_state() const { return adam_; }

 private:
  std::shared_ptr<const DifferentiableModel> model_;
  MetaConfig cfg_;
  nd::Parameter theta_;
  nd::AdamState adam_;
};

}  // namespace ams::meta
