#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "ams/error.hpp"
#include "ams/metalearn/evaluate.hpp"
#include "ams/metalearn/meta.hpp"
#include "ams/ndcore/gradcheck.hpp"
#include "ams/taskgen/suite.hpp"

using namespace ams;
using namespace ams::meta;
using taskgen::Example;
using taskgen::TaskInstance;

namespace {

// L(theta) = mean_i (theta - y_i)^2 with a single scalar parameter.
class Quadratic final : public DifferentiableModel {
 public:
  std::size_t parameter_count() const override { return 1; }
  double loss(std::span<const double> theta, const Batch& b, std::vector<double>* grad) const override {
    double l = 0.0, g = 0.0;
    const double n = static_cast<double>(b.rows());
    for (std::size_t i = 0; i < b.rows(); ++i) {
      const double r = theta[0] - b.targets.at(i, 0);
      l += r * r / n;
      g += 2.0 * r / n;
    }
    if (grad) *grad = {g};
    return l;
  }
};

// L(theta) = mean_i y_i (theta . x_i): linear in theta, so every Hessian is zero.
class LinearLoss final : public DifferentiableModel {
 public:
  explicit LinearLoss(std::size_t n) : n_(n) {}
  std::size_t parameter_count() const override { return n_; }
  double loss(std::span<const double> theta, const Batch& b, std::vector<double>* grad) const override {
    const double rows = static_cast<double>(b.rows());
    double l = 0.0;
    if (grad) grad->assign(n_, 0.0);
    for (std::size_t i = 0; i < b.rows(); ++i) {
      const double y = b.targets.at(i, 0);
      for (std::size_t k = 0; k < n_; ++k) {
        const double x = b.inputs.at(i, k % b.inputs.dim(1)) + static_cast<double>(k);
        l += y * theta[k] * x / rows;
        if (grad) (*grad)[k] += y * x / rows;
      }
    }
    return l;
  }

 private:
  std::size_t n_;
};

Example ex(double x, double y) { return Example{{x}, {y}, -1}; }

TaskInstance task(int id, std::vector<Example> support, std::vector<Example> query) {
  TaskInstance t;
  t.domain_id = id;
  t.support = std::move(support);
  t.query = std::move(query);
  return t;
}

TaskInstance random_sine_task(Rng& rng, int id, std::size_t half) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double a = u(rng), w = u(rng);
  std::vector<Example> s, q;
  for (std::size_t i = 0; i < half; ++i) {
    const double x1 = u(rng), x2 = u(rng);
    s.push_back(ex(x1, a * std::sin(w * x1)));
    q.push_back(ex(x2, a * std::sin(w * x2)));
  }
  return task(id, s, q);
}

double meta_objective(const DifferentiableModel& m, std::span<const double> theta,
                      const std::vector<TaskInstance>& tasks, const MetaConfig& cfg) {
  double f = 0.0;
  for (const auto& t : tasks)
    f += query_loss(m, inner_adapt(m, theta, taskgen::make_batch(t.support), cfg.alpha, cfg.inner_steps),
                    taskgen::make_batch(t.query));
  return f;
}

}  // namespace

TEST(InnerAdapt, ZeroStepSizeKeepsTheta) {
  const TaskModel model(1, 1, LossKind::squared_error);
  Rng rng(1);
  const auto theta = model.initial_parameters(rng);
  const auto t = random_sine_task(rng, 0, 5);
  EXPECT_EQ(inner_adapt(model, theta, taskgen::make_batch(t.support), 0.0, 3), theta);
}

TEST(InnerAdapt, OneStepSolvesQuadratic) {
  const Quadratic q;
  const double c = 1.75;
  const auto t = task(0, {ex(0.0, c)}, {ex(0.0, c)});
  const std::vector<double> theta{-3.0};
  EXPECT_EQ(inner_adapt(q, theta, taskgen::make_batch(t.support), 0.5, 1)[0], c);
}

TEST(InnerAdapt, LinearModelMatchesHandIteration) {
  const TaskModel model(1, 1, LossKind::squared_error, {});  // theta = [a, b], y = a x + b
  const std::vector<double> xs{-1.0, 0.5, 2.0, 3.0}, ys{0.3, 1.0, -0.4, 2.2};
  std::vector<Example> support;
  for (int i = 0; i < 4; ++i) support.push_back(ex(xs[i], ys[i]));
  const double alpha = 0.05;
  double a = 0.7, b = -0.2;
  for (int step = 0; step < 3; ++step) {
    double ga = 0.0, gb = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double r = a * xs[i] + b - ys[i];
      ga += 2.0 * r * xs[i] / 4.0;
      gb += 2.0 * r / 4.0;
    }
    a -= alpha * ga;
    b -= alpha * gb;
  }
  const auto adapted = inner_adapt(model, std::vector<double>{0.7, -0.2}, taskgen::make_batch(support), alpha, 3);
  EXPECT_NEAR(adapted[0], a, 1e-14);
  EXPECT_NEAR(adapted[1], b, 1e-14);
}

TEST(InnerAdapt, DoesNotMutateTheta) {
  const TaskModel model(1, 1, LossKind::squared_error);
  Rng rng(2);
  const auto theta = model.initial_parameters(rng);
  const auto before = theta;
  const auto t = random_sine_task(rng, 0, 5);
  (void)inner_adapt(model, theta, taskgen::make_batch(t.support), 0.1, 5);
  EXPECT_EQ(std::hash<std::string>{}(std::string(reinterpret_cast<const char*>(theta.data()), theta.size() * 8)),
            std::hash<std::string>{}(std::string(reinterpret_cast<const char*>(before.data()), before.size() * 8)));
}

TEST(QueryLoss, PerfectPredictorIsZero) {
  const TaskModel model(1, 1, LossKind::squared_error, {});
  const auto t = task(0, {}, {ex(1.0, 2.5), ex(-2.0, -3.5), ex(0.0, 0.5)});
  EXPECT_EQ(query_loss(model, std::vector<double>{2.0, 0.5}, taskgen::make_batch(t.query)), 0.0);
}

TEST(QueryLoss, ZeroPredictorOnUnitLabels) {
  const TaskModel model(1, 1, LossKind::squared_error, {});
  const auto t = task(0, {}, {ex(1.0, 1.0), ex(-2.0, -1.0)});
  EXPECT_EQ(query_loss(model, std::vector<double>{0.0, 0.0}, taskgen::make_batch(t.query)), 1.0);
}

TEST(QueryLoss, MatchesPerExampleArithmetic) {
  const TaskModel model(1, 1, LossKind::squared_error, {});
  const std::vector<double> xs{-1.5, 0.2, 0.9, 4.0}, ys{1.0, -0.3, 0.25, 2.0};
  std::vector<Example> q;
  for (int i = 0; i < 4; ++i) q.push_back(ex(xs[i], ys[i]));
  const double a = -0.37, b = 1.21;
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) expected += (a * xs[i] + b - ys[i]) * (a * xs[i] + b - ys[i]);
  expected /= 4.0;
  EXPECT_NEAR(query_loss(model, std::vector<double>{a, b}, taskgen::make_batch(q)), expected, 1e-15);
}

TEST(TaskModelLoss, GradientsMatchFiniteDifferences) {
  for (auto loss : {LossKind::squared_error, LossKind::cross_entropy}) {
    const std::size_t out = loss == LossKind::squared_error ? 1 : 3;
    const TaskModel model(2, out, loss, {5, 4});
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      nd::Parameter theta("theta", nd::Tensor::vector(model.initial_parameters(rng)));
      std::uniform_real_distribution<double> u(-2, 2);
      std::vector<Example> rows;
      for (int i = 0; i < 6; ++i) {
        Example e{{u(rng), u(rng)}, {}, -1};
        if (loss == LossKind::squared_error) e.target = {u(rng)};
        else e.label = i % 3;
        rows.push_back(e);
      }
      const auto batch = taskgen::make_batch(rows);
      const auto rep = nd::check_gradients([&] { return model.loss(theta.value.values(), batch, nullptr); },
                                           [&] {
                                             std::vector<double> g;
                                             model.loss(theta.value.values(), batch, &g);
                                             for (std::size_t i = 0; i < g.size(); ++i) theta.grad[i] += g[i];
                                           },
                                           {&theta});
      ASSERT_TRUE(rep.passed()) << "seed " << seed << " err " << rep.max_error;
    }
  }
}

TEST(OuterGradient, QuadraticClosedForm) {
  const Quadratic q;
  const double a = 1.2, b = -0.4, alpha = 0.1, theta0 = 0.3;
  MetaConfig cfg;
  cfg.alpha = alpha;
  cfg.meta_batch = 1;
  const std::vector<TaskInstance> tasks{task(0, {ex(0, a)}, {ex(0, b)})};
  std::vector<double> g;
  outer_gradient(q, std::vector<double>{theta0}, tasks, cfg, g, Execution::serial);
  const double adapted = theta0 - alpha * 2.0 * (theta0 - a);
  const double expected = (1.0 - alpha * 2.0) * 2.0 * (adapted - b);
  EXPECT_NEAR(g[0], expected, 1e-8);
}

TEST(OuterGradient, MamlMatchesFiniteDifferencesOfMetaObjective) {
  const TaskModel model(1, 1, LossKind::squared_error, {2});  // 7 parameters
  ASSERT_LE(model.parameter_count(), 10u);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    MetaConfig cfg;
    cfg.alpha = 0.1;
    cfg.inner_steps = 1 + static_cast<int>(seed % 3);
    cfg.meta_batch = 3;
    nd::Parameter theta("theta", nd::Tensor::vector(model.initial_parameters(rng)));
    std::vector<TaskInstance> tasks;
    for (int j = 0; j < 3; ++j) tasks.push_back(random_sine_task(rng, 2 - j, 5));
    nd::GradCheckOptions opts;
    opts.rel_tol = 1e-3;
    const auto rep = nd::check_gradients(
        [&] { return meta_objective(model, theta.value.values(), tasks, cfg); },
        [&] {
          std::vector<double> g;
          outer_gradient(model, theta.value.values(), tasks, cfg, g, Execution::serial);
          for (std::size_t i = 0; i < g.size(); ++i) theta.grad[i] += g[i];
        },
        {&theta}, opts);
    ASSERT_TRUE(rep.passed(1e-3)) << "seed " << seed << " err " << rep.max_error;
  }
}

TEST(OuterGradient, FomamlEqualsMamlWithoutCurvature) {
  const LinearLoss model(3);
  Rng rng(4);
  std::vector<TaskInstance> tasks;
  for (int j = 0; j < 3; ++j) tasks.push_back(random_sine_task(rng, j, 4));
  const std::vector<double> theta{0.4, -1.1, 0.8};
  MetaConfig cfg;
  cfg.alpha = 0.2;
  cfg.inner_steps = 2;
  cfg.meta_batch = 3;
  std::vector<double> g_maml, g_fo;
  outer_gradient(model, theta, tasks, cfg, g_maml, Execution::serial);
  cfg.variant = Variant::fomaml;
  outer_gradient(model, theta, tasks, cfg, g_fo, Execution::serial);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g_maml[i], g_fo[i], 1e-8);
}

TEST(OuterGradient, ReptileDirectionIsMeanDisplacement) {
  const TaskModel model(1, 1, LossKind::squared_error, {4});
  Rng rng(5);
  const auto theta = model.initial_parameters(rng);
  std::vector<TaskInstance> tasks{random_sine_task(rng, 3, 5), random_sine_task(rng, 0, 5), random_sine_task(rng, 1, 5)};
  MetaConfig cfg;
  cfg.variant = Variant::reptile;
  cfg.alpha = 0.05;
  cfg.inner_steps = 4;
  std::vector<double> g;
  outer_gradient(model, theta, tasks, cfg, g, Execution::serial);
  std::vector<double> expected(theta.size(), 0.0);
  for (int j : {1, 2, 0}) {  // ascending domain id
    const auto adapted = inner_adapt(model, theta, taskgen::make_batch(tasks[j].support), cfg.alpha, cfg.inner_steps);
    for (std::size_t i = 0; i < theta.size(); ++i) expected[i] += theta[i] - adapted[i];
  }
  for (auto& e : expected) e /= 3.0;
  EXPECT_EQ(g, expected);
}

TEST(OuterGradient, ReptileSgdStepMovesTowardsAdaptedMean) {
  auto model = std::make_shared<TaskModel>(1, 1, LossKind::squared_error, std::vector<std::size_t>{4});
  Rng rng(6);
  const auto theta = model->initial_parameters(rng);
  std::vector<TaskInstance> tasks{random_sine_task(rng, 0, 5), random_sine_task(rng, 1, 5)};
  MetaConfig cfg;
  cfg.variant = Variant::reptile;
  cfg.optimizer = OuterOptimizer::sgd;
  cfg.beta = 0.5;
  cfg.meta_batch = 2;
  cfg.inner_steps = 3;
  cfg.alpha = 0.05;
  MetaLearner learner(model, theta, cfg);
  learner.meta_step(tasks, Execution::serial);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double mean_shift = 0.0;
    for (const auto& t : tasks)
      mean_shift += inner_adapt(*model, theta, taskgen::make_batch(t.support), cfg.alpha, cfg.inner_steps)[i] - theta[i];
    mean_shift /= 2.0;
    EXPECT_NEAR(learner.theta()[i], theta[i] + cfg.beta * mean_shift, 1e-15);
  }
}

TEST(MetaStep, ReptileWithoutInnerStepsKeepsTheta) {
  auto model = std::make_shared<TaskModel>(1, 1, LossKind::squared_error);
  Rng rng(7);
  const auto theta = model->initial_parameters(rng);
  MetaConfig cfg;
  cfg.variant = Variant::reptile;
  cfg.inner_steps = 0;
  cfg.meta_batch = 2;
  MetaLearner learner(model, theta, cfg);
  std::vector<TaskInstance> tasks{random_sine_task(rng, 0, 5), random_sine_task(rng, 1, 5)};
  learner.meta_step(tasks);
  EXPECT_TRUE(std::equal(theta.begin(), theta.end(), learner.theta().begin()));
}

TEST(MetaStep, BatchGradientIsSumOfTaskContributions) {
  const TaskModel model(1, 1, LossKind::squared_error, {6});
  Rng rng(8);
  const auto theta = model.initial_parameters(rng);
  std::vector<TaskInstance> tasks{random_sine_task(rng, 2, 5), random_sine_task(rng, 0, 5), random_sine_task(rng, 1, 5)};
  for (auto v : {Variant::maml, Variant::fomaml, Variant::mtl}) {
    MetaConfig cfg;
    cfg.variant = v;
    std::vector<double> g;
    const auto res = outer_gradient(model, theta, tasks, cfg, g, Execution::serial);
    std::vector<double> expected(theta.size(), 0.0);
    for (int j : {1, 2, 0}) {
      const auto c = task_contribution(model, theta, tasks[j], cfg);
      for (std::size_t i = 0; i < theta.size(); ++i) expected[i] += c.grad[i];
    }
    EXPECT_EQ(g, expected) << to_string(v);
    EXPECT_EQ(res.domain_ids, (std::vector<int>{2, 0, 1}));
    for (double l : res.losses) EXPECT_GE(l, 0.0);
  }
}

TEST(MetaStep, ParallelEqualsSerialBitwise) {
  auto model = std::make_shared<TaskModel>(1, 1, LossKind::squared_error);
  Rng rng(9);
  const auto theta = model->initial_parameters(rng);
  std::vector<TaskInstance> tasks;
  for (int j = 0; j < 5; ++j) tasks.push_back(random_sine_task(rng, (j * 3) % 5, 10));
  for (auto v : {Variant::maml, Variant::fomaml, Variant::reptile, Variant::mtl}) {
    MetaConfig cfg;
    cfg.variant = v;
    cfg.meta_batch = 5;
    MetaLearner a(model, theta, cfg), b(model, theta, cfg);
    for (int s = 0; s < 3; ++s) {
      const auto ra = a.meta_step(tasks, Execution::serial);
      const auto rb = b.meta_step(tasks, Execution::parallel);
      EXPECT_EQ(ra.losses, rb.losses);
    }
    EXPECT_TRUE(std::equal(a.theta().begin(), a.theta().end(), b.theta().begin())) << to_string(v);
  }
}

TEST(MetaStep, WrongTaskCountRejected) {
  auto model = std::make_shared<TaskModel>(1, 1, LossKind::squared_error);
  Rng rng(1);
  MetaConfig cfg;
  cfg.meta_batch = 3;
  MetaLearner learner(model, model->initial_parameters(rng), cfg);
  std::vector<TaskInstance> tasks{random_sine_task(rng, 0, 4)};
  EXPECT_THROW(learner.meta_step(tasks), ConfigError);
}

TEST(MetaStep, MtlReportsTrainingLoss) {
  const TaskModel model(1, 1, LossKind::squared_error);
  Rng rng(10);
  const auto theta = model.initial_parameters(rng);
  const auto t = random_sine_task(rng, 0, 6);
  MetaConfig cfg;
  cfg.variant = Variant::mtl;
  const auto c = task_contribution(model, theta, t, cfg);
  EXPECT_EQ(c.loss, model.loss(theta, taskgen::concat_batches(taskgen::make_batch(t.support), taskgen::make_batch(t.query)), nullptr));
}

TEST(MetaConfig, Validation) {
  MetaConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  for (auto bad : std::vector<std::function<void(MetaConfig&)>>{
           [](MetaConfig& c) { c.alpha = 0; }, [](MetaConfig& c) { c.beta = -1; },
           [](MetaConfig& c) { c.inner_steps = -1; }, [](MetaConfig& c) { c.meta_batch = 0; }}) {
    MetaConfig c;
    bad(c);
    EXPECT_THROW(c.validate(), ConfigError);
  }
  EXPECT_THROW(variant_from_string("maml2"), ConfigError);
}

TEST(Evaluate, NoAdaptationIsDeterministic) {
  const auto suite = taskgen::build_suite(taskgen::Preset::mixed, 4, 8, 1);
  const auto model = TaskModel::for_suite(taskgen::Family::sinusoid, 0);
  Rng init(3);
  const auto theta = model.initial_parameters(init);
  Rng r1(77), r2(77);
  const auto a = evaluate_adaptation(model, theta, suite, 0, 4, 0, 10, 0.01, r1, Execution::serial);
  const auto b = evaluate_adaptation(model, theta, suite, 0, 4, 0, 10, 0.01, r2, Execution::parallel);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.losses, b.losses);
}

TEST(Evaluate, AdaptationLowersLossOnNoiselessTarget) {
  taskgen::SuiteOptions o;
  o.noise_easy = o.noise_hard = 0.0;
  const auto suite = taskgen::build_suite(taskgen::Preset::balanced, 3, 20, 4, o);
  const auto model = TaskModel::for_suite(taskgen::Family::sinusoid, 0);
  Rng init(5);
  const auto theta = model.initial_parameters(init);
  Rng r1(6), r2(6);
  const auto before = evaluate_adaptation(model, theta, suite, 0, 10, 0, 20, 0.05, r1);
  const auto after = evaluate_adaptation(model, theta, suite, 0, 10, 100, 20, 0.05, r2);
  EXPECT_LT(after.mean, before.mean);
}

TEST(Evaluate, AggregationMatchesRecomputation) {
  const auto suite = taskgen::build_suite(taskgen::Preset::mixed, 4, 8, 1);
  const auto model = TaskModel::for_suite(taskgen::Family::sinusoid, 0);
  Rng init(3), rng(4);
  const auto theta = model.initial_parameters(init);
  const auto st = evaluate_adaptation(model, theta, suite, 1, 4, 3, 50, 0.02, rng);
  ASSERT_EQ(st.losses.size(), 50u);
  double m = 0.0;
  for (double l : st.losses) m += l;
  m /= 50.0;
  double ss = 0.0;
  for (double l : st.losses) ss += (l - m) * (l - m);
  EXPECT_NEAR(st.mean, m, 1e-15);
  EXPECT_NEAR(st.std, std::sqrt(ss / 49.0), 1e-15);
}

TEST(Evaluate, ShotsBeyondSupportRejected) {
  const auto suite = taskgen::build_suite(taskgen::Preset::mixed, 4, 8, 1);
  const auto model = TaskModel::for_suite(taskgen::Family::sinusoid, 0);
  Rng init(3), rng(4);
  EXPECT_THROW(evaluate_adaptation(model, model.initial_parameters(init), suite, 0, 5, 1, 2, 0.01, rng), ConfigError);
}
