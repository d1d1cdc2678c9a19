#include "ams/metalearn/meta.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "ams/error.hpp"

namespace ams::meta {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::maml:
      return "maml";
    case Variant::fomaml:
      return "fomaml";
    case Variant::reptile:
      return "reptile";
    case Variant::mtl:
      return "mtl";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "maml") return Variant::maml;
  if (s == "fomaml") return Variant::fomaml;
  if (s == "reptile") return Variant::reptile;
  if (s == "mtl") return Variant::mtl;
  throw ConfigError("unknown meta variant '" + s + "'");
}

std::string to_string(OuterOptimizer o) { return o == OuterOptimizer::sgd ? "sgd" : "adam"; }

OuterOptimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OuterOptimizer::sgd;
  if (s == "adam") return OuterOptimizer::adam;
  throw ConfigError("unknown outer optimizer '" + s + "'");
}

void MetaConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("meta.alpha must be > 0");
  if (!(beta > 0.0)) throw ConfigError("meta.beta must be > 0");
  if (inner_steps < 0) throw ConfigError("meta.inner_steps must be >= 0");
  if (meta_batch < 1) throw ConfigError("meta.M must be >= 1");
  if (!(hvp_eps > 0.0)) throw ConfigError("meta.hvp_eps must be > 0");
}

std::vector<double> inner_adapt(const DifferentiableModel& model, std::span<const double> theta,
                                const Batch& support, double alpha, int steps) {
  if (support.rows() == 0) throw DimensionError("inner_adapt needs a non-empty support set");
  std::vector<double> adapted(theta.begin(), theta.end());
  std::vector<double> g;
  for (int s = 0; s < steps; ++s) {
    model.loss(adapted, support, &g);
    for (std::size_t i = 0; i < adapted.size(); ++i) adapted[i] -= alpha * g[i];
  }
  return adapted;
}

double query_loss(const DifferentiableModel& model, std::span<const double> adapted,
                  const Batch& query) {
  if (query.rows() == 0) throw DimensionError("query_loss needs a non-empty query set");
  return model.loss(adapted, query, nullptr);
}

std::vector<double> hessian_vector_product(const DifferentiableModel& model,
                                           std::span<const double> theta, const Batch& batch,
                                           std::span<const double> v, double hvp_eps) {
  const std::size_t n = theta.size();
  std::vector<double> hv(n, 0.0);
  const double norm = l2_norm(v);
  if (norm == 0.0) return hv;
  const double r = hvp_eps * (1.0 + max_abs(theta));
  std::vector<double> plus(n), minus(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = r * v[i] / norm;
    plus[i] = theta[i] + step;
    minus[i] = theta[i] - step;
  }
  std::vector<double> gp, gm;
  model.loss(plus, batch, &gp);
  model.loss(minus, batch, &gm);
  const double scale = norm / (2.0 * r);
  for (std::size_t i = 0; i < n; ++i) hv[i] = (gp[i] - gm[i]) * scale;
  return hv;
}

TaskContribution task_contribution(const DifferentiableModel& model, std::span<const double> theta,
                                   const taskgen::TaskInstance& task, const MetaConfig& cfg) {
  const Batch support = taskgen::make_batch(task.support);
  const Batch query = taskgen::make_batch(task.query);
  TaskContribution out;

  if (cfg.variant == Variant::mtl) {
    out.loss = model.loss(theta, taskgen::concat_batches(support, query), &out.grad);
    return out;
  }

  // Inner trajectory theta_0 .. theta_n; MAML needs every intermediate point.
  std::vector<std::vector<double>> trajectory;
  std::vector<double> current(theta.begin(), theta.end());
  std::vector<double> g;
  for (int s = 0; s < cfg.inner_steps; ++s) {
    model.loss(current, support, &g);
    if (cfg.variant == Variant::maml) trajectory.push_back(current);
    for (std::size_t i = 0; i < current.size(); ++i) current[i] -= cfg.alpha * g[i];
  }

  if (cfg.variant == Variant::reptile) {
    out.loss = model.loss(current, query, nullptr);
    out.grad.resize(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) out.grad[i] = theta[i] - current[i];
    return out;
  }

  out.loss = model.loss(current, query, &out.grad);
  if (cfg.variant == Variant::maml) {
    // d theta_{t+1} / d theta_t = I - alpha H_t, applied right to left.
    for (std::size_t t = trajectory.size(); t-- > 0;) {
      const std::vector<double> hv =
          hessian_vector_product(model, trajectory[t], support, out.grad, cfg.hvp_eps);
      for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] -= cfg.alpha * hv[i];
    }
  }
  return out;
}

MetaBatchResult outer_gradient(const DifferentiableModel& model, std::span<const double> theta,
                               std::span<const taskgen::TaskInstance> tasks, const MetaConfig& cfg,
                               std::vector<double>& grad, Execution exec) {
  const std::size_t m = tasks.size();
  std::vector<TaskContribution> parts(m);
  std::vector<std::exception_ptr> errors(m);

  if (exec == Execution::serial) {
    for (std::size_t j = 0; j < m; ++j) parts[j] = task_contribution(model, theta, tasks[j], cfg);
  } else {
    const auto count = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      try {
        parts[static_cast<std::size_t>(j)] =
            task_contribution(model, theta, tasks[static_cast<std::size_t>(j)], cfg);
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    }
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tasks[a].domain_id < tasks[b].domain_id;
  });

  grad.assign(theta.size(), 0.0);
  for (std::size_t j : order) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += parts[j].grad[i];
  }
  if (cfg.variant == Variant::reptile && m > 0) {
    for (double& x : grad) x /= static_cast<double>(m);
  }

  MetaBatchResult result;
  for (std::size_t j = 0; j < m; ++j) {
    result.losses.push_back(parts[j].loss);
    result.domain_ids.push_back(tasks[j].domain_id);
  }
  result.grad_norm = l2_norm(grad);
  return result;
}

MetaLearner::MetaLearner(std::shared_ptr<const DifferentiableModel> model, std::vector<double> theta,
                         MetaConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {
  cfg_.validate();
  if (theta.size() != model_->parameter_count()) {
    throw DimensionError("initial theta has " + std::to_string(theta.size()) +
                         " entries, model expects " + std::to_string(model_->parameter_count()));
  }
  const std::size_t n = theta.size();
  theta_ = nd::Parameter("theta", nd::Tensor({n}, std::move(theta)));
}

void MetaLearner::set_theta(std::span<const double> theta) {
  if (theta.size() != theta_.size()) throw DimensionError("set_theta: size mismatch");
  std::copy(theta.begin(), theta.end(), theta_.value.data());
}

MetaBatchResult MetaLearner::meta_step(std::span<const taskgen::TaskInstance> tasks, Execution exec) {
  if (tasks.size() != static_cast<std::size_t>(cfg_.meta_batch)) {
    throw ConfigError("meta_step expects M=" + std::to_string(cfg_.meta_batch) + " tasks, got " +
                      std::to_string(tasks.size()));
  }
  std::vector<double> grad;
  MetaBatchResult result = outer_gradient(*model_, theta_.value.values(), tasks, cfg_, grad, exec);
  std::copy(grad.begin(), grad.end(), theta_.grad.data());
  const nd::ParameterList params{&theta_};
  if (cfg_.optimizer == OuterOptimizer::sgd) {
    nd::sgd_step(params, cfg_.beta);
  } else {
    nd::adam_step(adam_, params, cfg_.beta);
  }
  return result;
}

}  // namespace ams::meta
