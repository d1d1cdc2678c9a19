#include "ams/cli/gradcheck_suite.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "ams/metalearn/meta.hpp"
#include "ams/ndcore/activations.hpp"
#include "ams/ndcore/attention.hpp"
#include "ams/ndcore/gradcheck.hpp"
#include "ams/ndcore/linear.hpp"
#include "ams/ndcore/lstm.hpp"
#include "ams/ndcore/softmax.hpp"
#include "ams/rng.hpp"
#include "ams/sampling/policy.hpp"

namespace ams::cli {
namespace {

using nd::Parameter;
using nd::Tensor;

std::vector<double> uniform_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Parameter random_param(const std::string& id, std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  const std::size_t n = nd::shape_product(shape);
  return Parameter(id, Tensor(std::move(shape), uniform_values(rng, n, -scale, scale)));
}

// Scalar readout L = sum_i c_i y_i that turns any layer output into a loss.
double project(const Tensor& y, const Tensor& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
  return s;
}

void accumulate(Tensor& grad, const Tensor& d) {
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += d[i];
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) h = (h ^ ch) * 0x100000001b3ULL;
  return h;
}

// One seed of one component: returns the report of a single check_gradients call.
using SeedCheck = std::function<nd::GradCheckReport(Rng&, std::uint64_t)>;

ComponentCheck run_component(const std::string& name, double tol, int seeds, std::uint64_t base,
                             const SeedCheck& check) {
  ComponentCheck out;
  out.name = name;
  out.tolerance = tol;
  nd::GradCheckReport total;
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed = derive_seed(base, static_cast<std::uint64_t>(s), fnv1a(name));
    Rng rng(seed);
    total.merge(check(rng, seed));
  }
  out.seeds = seeds;
  out.max_error = total.max_error;
  out.coords = total.coords_checked;
  out.worst = total.worst_param + "[" + std::to_string(total.worst_index) + "]";
  return out;
}

nd::GradCheckReport check_linear(Rng& rng, std::uint64_t) {
  nd::LinearLayer layer(3, 4, "linear");
  layer.init_uniform(rng, 2.0);
  for (auto& b : layer.bias.value.values()) b = std::uniform_real_distribution<double>(-1, 1)(rng);
  Parameter x = random_param("x", {2, 3}, rng);
  const Tensor c = Tensor({2, 4}, uniform_values(rng, 8, -1, 1));
  auto params = layer.parameters();
  params.push_back(&x);
  return nd::check_gradients([&] { return project(nd::linear_forward(layer, x.value), c); },
                             [&] { accumulate(x.grad, nd::linear_backward(layer, x.value, c)); }, params);
}

SeedCheck check_activation(nd::Activation kind) {
  return [kind](Rng& rng, std::uint64_t) {
    Parameter x = random_param("x", {6}, rng, 3.0);
    // Keep relu inputs away from the kink so central differences are exact.
    for (auto& v : x.value.values())
      if (std::abs(v) < 0.1) v = v < 0 ? -0.1 - std::abs(v) : 0.1 + v;
    const Tensor c = Tensor::vector(uniform_values(rng, 6, -1, 1));
    return nd::check_gradients(
        [&] { return project(nd::activate(x.value, kind), c); },
        [&] { accumulate(x.grad, nd::activate_backward(x.value, nd::activate(x.value, kind), c, kind)); },
        {&x});
  };
}

nd::GradCheckReport check_softmax(Rng& rng, std::uint64_t) {
  Parameter z = random_param("logits", {5}, rng, 3.0);
  const Tensor c = Tensor::vector(uniform_values(rng, 5, -1, 1));
  return nd::check_gradients([&] { return project(nd::softmax(z.value), c); },
                             [&] { accumulate(z.grad, nd::softmax_backward(nd::softmax(z.value), c)); }, {&z});
}

nd::GradCheckReport check_lstm(Rng& rng, std::uint64_t) {
  nd::LstmCell cell(3, 4, "lstm");
  cell.init_uniform(rng, 2.0);
  for (auto& b : cell.bias.value.values()) b = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  Parameter x = random_param("x", {3}, rng);
  Parameter h = random_param("h_prev", {4}, rng);
  Parameter c = random_param("c_prev", {4}, rng);
  const Tensor ch = Tensor::vector(uniform_values(rng, 4, -1, 1));
  const Tensor cc = Tensor::vector(uniform_values(rng, 4, -1, 1));
  auto params = cell.parameters();
  params.insert(params.end(), {&x, &h, &c});
  return nd::check_gradients(
      [&] {
        const auto step = nd::lstm_forward(cell, x.value, h.value, c.value);
        return project(step.h, ch) + project(step.c, cc);
      },
      [&] {
        const auto step = nd::lstm_forward(cell, x.value, h.value, c.value);
        const auto g = nd::lstm_backward(cell, step.cache, ch, cc);
        accumulate(x.grad, g.dx);
        accumulate(h.grad, g.dh_prev);
        accumulate(c.grad, g.dc_prev);
      },
      params);
}

nd::GradCheckReport check_attention(Rng& rng, std::uint64_t) {
  nd::AttentionUnit unit(2, 3, "attention");
  unit.init_uniform(rng, 2.0);
  for (auto& b : unit.bias.value.values()) b = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  Parameter u = random_param("features", {4, 2}, rng, 2.0);
  const Tensor c = Tensor::vector(uniform_values(rng, 8, -1, 1));
  auto params = unit.parameters();
  params.push_back(&u);
  return nd::check_gradients(
      [&] { return project(nd::attention_forward(unit, u.value).context, c); },
      [&] {
        const auto out = nd::attention_forward(unit, u.value);
        accumulate(u.grad, nd::attention_backward(unit, out.cache, c));
      },
      params);
}

SeedCheck check_policy(sampling::Surrogate surrogate, std::size_t K, std::size_t attention, std::size_t input,
                       std::size_t hidden, std::size_t max_coords) {
  return [=](Rng& rng, std::uint64_t seed) {
    sampling::PolicyConfig cfg;
    cfg.surrogate = surrogate;
    cfg.entropy_weight = 0.05;
    cfg.attention_size = attention;
    cfg.input_size = input;
    cfg.hidden_size = hidden;
    sampling::PolicyNetwork net(K, cfg);
    net.init(rng);
    auto state = sampling::PolicyState::initial(K, hidden);
    for (auto& v : state.h.values()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    for (auto& v : state.c.values()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    auto p = uniform_values(rng, K, 0.1, 1.0);
    double total = 0.0;
    for (double v : p) total += v;
    for (auto& v : p) v /= total;
    state.p_prev = p;
    const auto q = sampling::normalize_input(uniform_values(rng, K, 0.0, 2.0), cfg.input_norm);
    const std::vector<int> ids = {0, static_cast<int>(K) - 1, static_cast<int>(K / 2)};
    const auto rewards = uniform_values(rng, ids.size(), -1.0, 1.0);

    nd::GradCheckOptions opts;
    opts.max_coords_per_param = max_coords;
    opts.seed = seed;
    return nd::check_gradients(
        [&] { return sampling::surrogate_value(sampling::policy_forward(net, state, q).probs, ids, rewards, cfg); },
        [&] { sampling::surrogate_backward(net, sampling::policy_forward(net, state, q), ids, rewards, cfg); },
        net.parameters(), opts);
  };
}

// Tiny regression tasks for the outer-gradient check.
taskgen::TaskInstance random_task(Rng& rng, int id, std::size_t half) {
  taskgen::TaskInstance t;
  t.domain_id = id;
  std::uniform_real_distribution<double> x(-2.0, 2.0);
  const double a = x(rng), w = x(rng);
  for (std::size_t i = 0; i < 2 * half; ++i) {
    const double xi = x(rng);
    taskgen::Example e{{xi}, {a * std::sin(w * xi)}, -1};
    (i < half ? t.support : t.query).push_back(e);
  }
  return t;
}

SeedCheck check_outer_gradient(meta::Variant variant) {
  return [variant](Rng& rng, std::uint64_t seed) {
    const meta::TaskModel model(1, 1, meta::LossKind::squared_error, {2});  // 7 parameters
    meta::MetaConfig cfg;
    cfg.variant = variant;
    cfg.alpha = 0.1;
    cfg.inner_steps = 1 + static_cast<int>(seed % 2);
    cfg.meta_batch = 2;
    Parameter theta("theta", Tensor::vector(model.initial_parameters(rng)));
    for (auto& v : theta.value.values()) v += std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    const std::vector<taskgen::TaskInstance> tasks = {random_task(rng, 0, 5), random_task(rng, 1, 5)};
    const auto batches = [&] {
      std::vector<std::pair<taskgen::Batch, taskgen::Batch>> b;
      for (const auto& t : tasks) b.emplace_back(taskgen::make_batch(t.support), taskgen::make_batch(t.query));
      return b;
    }();
    nd::GradCheckOptions opts;
    opts.rel_tol = 1e-3;
    return nd::check_gradients(
        [&] {
          double f = 0.0;
          for (const auto& [s, q] : batches)
            f += meta::query_loss(model, meta::inner_adapt(model, theta.value.values(), s, cfg.alpha, cfg.inner_steps), q);
          return f;
        },
        [&] {
          std::vector<double> g;
          meta::outer_gradient(model, theta.value.values(), tasks, cfg, g, meta::Execution::serial);
          for (std::size_t i = 0; i < g.size(); ++i) theta.grad[i] += g[i];
        },
        {&theta}, opts);
  };
}

}  // namespace

std::vector<ComponentCheck> run_gradcheck_suite(const GradcheckSuiteOptions& o) {
  using nd::Activation;
  using sampling::Surrogate;
  const int n = o.seeds;
  std::vector<ComponentCheck> out;
  out.push_back(run_component("linear", 1e-4, n, o.seed, check_linear));
  out.push_back(run_component("tanh", 1e-4, n, o.seed, check_activation(Activation::tanh)));
  out.push_back(run_component("sigmoid", 1e-4, n, o.seed, check_activation(Activation::sigmoid)));
  out.push_back(run_component("relu", 1e-4, n, o.seed, check_activation(Activation::relu)));
  out.push_back(run_component("softmax", 1e-4, n, o.seed, check_softmax));
  out.push_back(run_component("lstm", 1e-4, n, o.seed, check_lstm));
  out.push_back(run_component("attention", 1e-4, n, o.seed, check_attention));
  out.push_back(run_component("policy/prob", 1e-4, n, o.seed, check_policy(Surrogate::prob_weighted, 4, 3, 5, 6, 0)));
  out.push_back(run_component("policy/logprob", 1e-4, n, o.seed, check_policy(Surrogate::logprob_weighted, 4, 3, 5, 6, 0)));
  out.push_back(run_component("policy/prob-full", 1e-4, o.full_policy_seeds, o.seed,
                              check_policy(Surrogate::prob_weighted, 8, 16, 32, 100, o.full_policy_coords)));
  out.push_back(run_component("maml/outer", 1e-3, n, o.seed, check_outer_gradient(meta::Variant::maml)));
  return out;
}

std::string format_gradcheck_report(const std::vector<ComponentCheck>& checks) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %14s %10s %8s %6s  %s\n", "component", "max_rel_error", "tolerance",
                "coords", "seeds", "status");
  out += buf;
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-18s %14.3e %10.1e %8zu %6d  %s  worst=%s\n", c.name.c_str(), c.max_error,
                  c.tolerance, c.coords, c.seeds, c.passed() ? "PASS" : "FAIL", c.worst.c_str());
    out += buf;
  }
  return out;
}

}  // namespace ams::cli
