#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <set>

#include "ams/error.hpp"
#include "ams/ndcore/gradcheck.hpp"
#include "ams/ndcore/softmax.hpp"
#include "ams/sampling/checkpoint.hpp"
#include "ams/sampling/sampler.hpp"

using namespace ams;
using namespace ams::sampling;

namespace {

std::vector<double> draw(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

PolicyConfig small_policy() {
  PolicyConfig c;
  c.attention_size = 4;
  c.input_size = 6;
  c.hidden_size = 8;
  return c;
}

std::vector<std::vector<double>> snapshot(const PolicyNetwork& net) {
  std::vector<std::vector<double>> out;
  for (const auto* p : net.parameters()) out.push_back(p->value.storage());
  return out;
}

PolicyState random_state(Rng& rng, std::size_t K, std::size_t H) {
  auto s = PolicyState::initial(K, H);
  for (auto& v : s.h.values()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  for (auto& v : s.c.values()) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
  auto p = draw(rng, K, 0.1, 1.0);
  double t = 0.0;
  for (double x : p) t += x;
  for (auto& x : p) x /= t;
  s.p_prev = p;
  return s;
}

}  // namespace

TEST(Uniform, FourDomains) { EXPECT_EQ(uniform_probs(4), std::vector<double>(4, 0.25)); }

TEST(Uniform, SingleDomain) { EXPECT_EQ(uniform_probs(1), std::vector<double>{1.0}); }

TEST(Uniform, NineSumsToOneCompensated) {
  const auto p = uniform_probs(9);
  EXPECT_EQ(compensated_sum(p), 1.0);
  EXPECT_TRUE(is_simplex(p));
}

TEST(Uniform, ZeroDomainsRejected) { EXPECT_THROW(uniform_probs(0), DimensionError); }

TEST(Ppq, EqualPoolsUniform) {
  const std::vector<std::size_t> v(5, 100);
  for (double p : ppq_probs(v, 48)) EXPECT_DOUBLE_EQ(p, 0.2);
}

TEST(Ppq, ProportionalToPool) {
  const std::vector<std::size_t> v{80, 10, 10};
  const auto p = ppq_probs(v, 4);
  EXPECT_DOUBLE_EQ(p[0], 0.8);
  EXPECT_DOUBLE_EQ(p[1], 0.1);
  EXPECT_DOUBLE_EQ(p[2], 0.1);
}

TEST(Ppq, LogCombinationIsSoftmaxOfLogBinomials) {
  auto log_choose = [](int n, int k) {
    double s = 0.0;
    for (int i = 1; i <= k; ++i) s += std::log(static_cast<double>(n - k + i) / i);
    return s;
  };
  const double a = log_choose(100, 48), b = log_choose(50, 48);
  const double pa = 1.0 / (1.0 + std::exp(b - a));
  const std::vector<std::size_t> v{100, 50};
  const auto p = ppq_probs(v, 48, PpqMode::log_combination);
  EXPECT_NEAR(p[0], pa, 1e-12);
  EXPECT_NEAR(p[1], 1.0 - pa, 1e-12);
}

TEST(Ppql, ZeroBufferIsUniform) { EXPECT_EQ(ppql_probs(std::vector<double>{0, 0, 0}), uniform_probs(3)); }

TEST(Ppql, ProportionalToLoss) {
  const auto p = ppql_probs(std::vector<double>{3, 1});
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
}

TEST(Ppql, NegativeEntryClampedToFloor) {
  const auto p = ppql_probs(std::vector<double>{2.0, -1.0, 1.0});
  const double z = 3.0 + kLossFloor;
  EXPECT_DOUBLE_EQ(p[0], 2.0 / z);
  EXPECT_DOUBLE_EQ(p[1], kLossFloor / z);
  EXPECT_DOUBLE_EQ(p[2], 1.0 / z);
}

TEST(Ppaql, WindowOneEqualsPpql) {
  WindowAverage h(3, 1);
  QueryLossBuffer buf(3);
  Rng rng(1);
  for (int s = 0; s < 20; ++s) {
    const int id = s % 3;
    const double l = draw(rng, 1, 0.1, 2.0)[0];
    h.record(id, l);
    buf.update(std::vector<int>{id}, std::vector<double>{l});
    if (s >= 2) {
      EXPECT_EQ(ppaql_probs(h), ppql_probs(buf.values()));
    }
  }
}

TEST(Ppaql, SlidingWindowMean) {
  WindowAverage h(1, 3);
  for (double l : {1.0, 2.0, 3.0, 4.0}) h.record(0, l);
  EXPECT_DOUBLE_EQ(h.averages()[0], 3.0);
}

TEST(Ppeaql, ConstantStreamFixedPoint) {
  ExpAverage a(3, 0.9);
  for (int s = 0; s < 200; ++s)
    for (int k = 0; k < 3; ++k) a.record(k, 0.7);
  for (double v : a.averages()) EXPECT_NEAR(v, 0.7, 1e-12);
  for (double p : ppeaql_probs(a)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-12);
}

TEST(Ppeaql, RecurrenceByHand) {
  ExpAverage a(2, 0.5);
  a.record(1, 4.0);
  a.record(1, 2.0);
  a.record(1, 0.0);
  EXPECT_DOUBLE_EQ(a.averages()[1], 0.5 * (0.5 * 4.0 + 0.5 * 2.0));
  EXPECT_EQ(a.averages()[0], 0.0);
  EXPECT_FALSE(a.seen(0));
}

TEST(Baselines, InvalidHyperparameters) {
  EXPECT_THROW(WindowAverage(3, 0), ConfigError);
  EXPECT_THROW(ExpAverage(3, 1.0), ConfigError);
  EXPECT_THROW(ExpAverage(3, 0.0), ConfigError);
}

TEST(Selection, TopTwo) {
  Rng rng(0);
  EXPECT_EQ(select_domains(std::vector<double>{0.5, 0.3, 0.15, 0.05}, 2, SelectionMode::top_m, rng),
            (std::vector<int>{0, 1}));
}

TEST(Selection, AllDomainsWhenMEqualsK) {
  Rng rng(0);
  for (auto mode : {SelectionMode::top_m, SelectionMode::stochastic}) {
    auto ids = select_domains(uniform_probs(5), 5, mode, rng);
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(ids, (std::vector<int>{0, 1, 2, 3, 4}));
  }
}

TEST(Selection, TieBreaksToLowerIndex) {
  Rng rng(0);
  EXPECT_EQ(select_domains(std::vector<double>{0.4, 0.4, 0.2}, 1, SelectionMode::top_m, rng), (std::vector<int>{0}));
  EXPECT_EQ(select_domains(std::vector<double>{0.2, 0.4, 0.4}, 2, SelectionMode::top_m, rng), (std::vector<int>{1, 2}));
}

TEST(Selection, TooManyRequested) {
  Rng rng(0);
  EXPECT_THROW(select_domains(uniform_probs(3), 4, SelectionMode::top_m, rng), ConfigError);
}

TEST(Selection, StochasticDistinctAndProportional) {
  Rng rng(5);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::vector<int> counts(4, 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto ids = select_domains(p, 1, SelectionMode::stochastic, rng);
    ++counts[ids[0]];
  }
  for (int k = 0; k < 4; ++k) {
    const double sd = std::sqrt(n * p[k] * (1 - p[k]));
    EXPECT_LE(std::abs(counts[k] - n * p[k]), 4.0 * sd);
  }
  for (int i = 0; i < 100; ++i) {
    const auto ids = select_domains(p, 3, SelectionMode::stochastic, rng);
    EXPECT_EQ(std::set<int>(ids.begin(), ids.end()).size(), 3u);
  }
}

TEST(Selection, StochasticNeverPicksZeroMassWhileMassRemains) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    auto ids = select_domains(std::vector<double>{0.5, 0.0, 0.5}, 2, SelectionMode::stochastic, rng);
    std::sort(ids.begin(), ids.end());
    ASSERT_EQ(ids, (std::vector<int>{0, 2}));
  }
}

TEST(Selection, TopMInvariantUnderLogitScaling) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto z = draw(rng, 7, -3, 3);
    const double scale = draw(rng, 1, 0.1, 10)[0];
    std::vector<double> zs(z);
    for (auto& v : zs) v *= scale;
    const auto a = nd::softmax(nd::Tensor::vector(z)), b = nd::softmax(nd::Tensor::vector(zs));
    auto ia = select_domains(a.values(), 3, SelectionMode::top_m, rng);
    auto ib = select_domains(b.values(), 3, SelectionMode::top_m, rng);
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    ASSERT_EQ(ia, ib) << "seed " << seed;
  }
}

TEST(Buffer, EmptyUpdateKeepsValues) {
  QueryLossBuffer b(3);
  b.update(std::vector<int>{0}, std::vector<double>{2.0});
  const std::vector<double> before(b.values().begin(), b.values().end());
  b.update(std::vector<int>{}, std::vector<double>{});
  EXPECT_TRUE(std::equal(before.begin(), before.end(), b.values().begin()));
}

TEST(Buffer, PointwiseOverwrite) {
  QueryLossBuffer b(3);
  b.update(std::vector<int>{1}, std::vector<double>{7.0});
  EXPECT_EQ(std::vector<double>(b.values().begin(), b.values().end()), (std::vector<double>{0, 7, 0}));
}

TEST(Buffer, ReplayOfEventLog) {
  Rng rng(3);
  QueryLossBuffer b(6);
  double reference[6] = {0, 0, 0, 0, 0, 0};
  for (int s = 0; s < 100; ++s) {
    std::vector<int> ids;
    std::vector<double> losses;
    for (int k = 0; k < 6; ++k)
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
        ids.push_back(k);
        losses.push_back(draw(rng, 1, -1, 5)[0]);
      }
    const std::vector<double> before(b.values().begin(), b.values().end());
    b.update(ids, losses);
    for (std::size_t j = 0; j < ids.size(); ++j) reference[ids[j]] = losses[j];
    for (int k = 0; k < 6; ++k) {
      ASSERT_EQ(b[k], reference[k]);
      if (std::find(ids.begin(), ids.end(), k) == ids.end()) {
        ASSERT_EQ(std::bit_cast<std::uint64_t>(b[k]), std::bit_cast<std::uint64_t>(before[k]));
      }
    }
  }
}

TEST(Buffer, Errors) {
  QueryLossBuffer b(3);
  EXPECT_THROW(b.update(std::vector<int>{3}, std::vector<double>{1.0}), IndexError);
  EXPECT_THROW(b.update(std::vector<int>{-1}, std::vector<double>{1.0}), IndexError);
  EXPECT_THROW(b.update(std::vector<int>{0, 1}, std::vector<double>{1.0}), DimensionError);
}

TEST(Samplers, EveryOutputIsSimplex) {
  const std::vector<std::size_t> pools{400, 200, 100, 50, 48};
  for (auto kind : {SamplerKind::uniform, SamplerKind::ppq, SamplerKind::ppql, SamplerKind::ppaql,
                    SamplerKind::ppeaql, SamplerKind::ams}) {
    for (auto unseen : {UnseenMode::floor, UnseenMode::optimistic}) {
      SamplerSpec spec;
      spec.kind = kind;
      spec.unseen = unseen;
      spec.policy = small_policy();
      auto sampler = make_sampler(spec, pools, 48, 7);
      QueryLossBuffer buf(5);
      Rng rng(11);
      for (int s = 0; s < 100; ++s) {
        const auto p = sampler->propose(buf);
        ASSERT_TRUE(is_simplex(p)) << to_string(kind) << " step " << s;
        const auto ids = select_domains(p, 2, sampler->selection(), rng);
        const auto losses = draw(rng, 2, 0.0, 3.0);
        buf.update(ids, losses);
        sampler->observe(ids, losses);
      }
    }
  }
}

TEST(Samplers, OptimisticUnseenMatchesHandRule) {
  SamplerSpec spec;
  spec.kind = SamplerKind::ppql;
  const std::vector<std::size_t> pools(4, 100);
  auto s = make_sampler(spec, pools, 48, 0);
  QueryLossBuffer buf(4);
  buf.update(std::vector<int>{0, 2}, std::vector<double>{1.0, 3.0});
  s->observe(std::vector<int>{0, 2}, std::vector<double>{1.0, 3.0});
  const auto p = s->propose(buf);
  EXPECT_EQ(p, ppql_probs(std::vector<double>{1.0, 3.0, 3.0, 3.0}));
  spec.unseen = UnseenMode::floor;
  auto f = make_sampler(spec, pools, 48, 0);
  f->observe(std::vector<int>{0, 2}, std::vector<double>{1.0, 3.0});
  EXPECT_EQ(f->propose(buf), ppql_probs(buf.values()));
}

TEST(Samplers, NamesRoundTrip) {
  for (auto k : {SamplerKind::uniform, SamplerKind::ppq, SamplerKind::ppql, SamplerKind::ppaql, SamplerKind::ppeaql,
                 SamplerKind::ams})
    EXPECT_EQ(sampler_kind_from_string(to_string(k)), k);
  EXPECT_THROW(sampler_kind_from_string("greedy"), ConfigError);
}

TEST(Rewards, BatchMeanBaseline) {
  EXPECT_EQ(policy_rewards(std::vector<double>{1, 2, 6}, RewardBaseline::batch_mean), (std::vector<double>{-2, -1, 3}));
  EXPECT_EQ(policy_rewards(std::vector<double>{1, 2, 6}, RewardBaseline::none), (std::vector<double>{1, 2, 6}));
}

TEST(Policy, ZeroParametersGiveUniform) {
  PolicyNetwork net(5, PolicyConfig{});
  net.zero_parameters();
  const auto fwd = policy_forward(net, PolicyState::initial(5, 100), std::vector<double>{1, 2, 3, 4, 5});
  for (double p : fwd.probs) EXPECT_DOUBLE_EQ(p, 0.2);
}

TEST(Policy, ForwardIsPure) {
  PolicyNetwork net(4, PolicyConfig{});
  Rng rng(2);
  net.init(rng);
  const auto state = random_state(rng, 4, 100);
  const std::vector<double> q{0.3, 1.2, -0.5, 0.0};
  const auto a = policy_forward(net, state, q), b = policy_forward(net, state, q);
  EXPECT_EQ(a.probs, b.probs);
  EXPECT_EQ(a.next, b.next);
  EXPECT_EQ(a.next.step, state.step + 1);
  EXPECT_EQ(a.next.p_prev, a.probs);
}

TEST(Policy, StateDimensions) {
  const auto s = PolicyState::initial(6, 100);
  EXPECT_EQ(s.h.size(), 100u);
  EXPECT_EQ(s.c.size(), 100u);
  EXPECT_TRUE(is_simplex(s.p_prev));
}

TEST(Policy, RejectsBadInput) {
  PolicyNetwork net(3, small_policy());
  const auto s = PolicyState::initial(3, 8);
  EXPECT_THROW(policy_forward(net, s, std::vector<double>{1, 2}), DimensionError);
  EXPECT_THROW(policy_forward(net, s, std::vector<double>{1, std::nan(""), 2}), NumericError);
}

TEST(Policy, OutputSimplexAndGradientK5) {
  for (auto surrogate : {Surrogate::prob_weighted, Surrogate::logprob_weighted}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      auto cfg = small_policy();
      cfg.surrogate = surrogate;
      cfg.entropy_weight = 0.01;
      PolicyNetwork net(5, cfg);
      net.init(rng);
      const auto state = random_state(rng, 5, cfg.hidden_size);
      const auto q = normalize_input(draw(rng, 5, 0, 3), InputNorm::zscore);
      const std::vector<int> ids{4, 1};
      const auto r = draw(rng, 2, -1, 2);
      ASSERT_TRUE(is_simplex(policy_forward(net, state, q).probs));
      const auto rep = nd::check_gradients(
          [&] { return surrogate_value(policy_forward(net, state, q).probs, ids, r, cfg); },
          [&] { surrogate_backward(net, policy_forward(net, state, q), ids, r, cfg); }, net.parameters());
      ASSERT_TRUE(rep.passed()) << "seed " << seed << " err " << rep.max_error << " at " << rep.worst_param;
    }
  }
}

TEST(Policy, SurrogateValueByHand) {
  const std::vector<double> p{0.5, 0.3, 0.2};
  const std::vector<int> ids{0, 2};
  const std::vector<double> r{2.0, -1.0};
  PolicyConfig cfg;
  cfg.entropy_weight = 0.1;
  const double h = -(0.5 * std::log(0.5) + 0.3 * std::log(0.3) + 0.2 * std::log(0.2));
  EXPECT_NEAR(surrogate_value(p, ids, r, cfg), 0.5 * 2.0 - 0.2 + 0.1 * h, 1e-15);
  cfg.entropy_mode = EntropyMode::penalty;
  EXPECT_NEAR(surrogate_value(p, ids, r, cfg), 0.5 * 2.0 - 0.2 - 0.1 * h, 1e-15);
  cfg.surrogate = Surrogate::logprob_weighted;
  cfg.entropy_weight = 0.0;
  EXPECT_NEAR(surrogate_value(p, ids, r, cfg), 2.0 * std::log(0.5) - std::log(0.2), 1e-15);
}

TEST(PolicyUpdate, ZeroLossesNoEntropyLeaveParameters) {
  for (auto baseline : {RewardBaseline::none, RewardBaseline::batch_mean}) {
    auto cfg = small_policy();
    cfg.entropy_weight = 0.0;
    cfg.baseline = baseline;
    PolicyNetwork net(3, cfg);
    Rng rng(4);
    net.init(rng);
    const auto before = snapshot(net);
    nd::AdamState adam;
    const auto fwd = policy_forward(net, PolicyState::initial(3, cfg.hidden_size), std::vector<double>{0, 0, 0});
    const std::vector<int> ids{0, 2};
    policy_update(net, adam, cfg, fwd, ids, policy_rewards(std::vector<double>{0, 0}, baseline));
    EXPECT_EQ(snapshot(net), before);
  }
}

TEST(PolicyUpdate, ZeroStepLeavesParameters) {
  auto cfg = small_policy();
  cfg.gamma = 0.0;
  PolicyNetwork net(3, cfg);
  Rng rng(4);
  net.init(rng);
  const auto before = snapshot(net);
  nd::AdamState adam;
  const auto fwd = policy_forward(net, PolicyState::initial(3, cfg.hidden_size), std::vector<double>{1, 0, 2});
  const std::vector<int> ids{0, 2};
  policy_update(net, adam, cfg, fwd, ids, std::vector<double>{1.0, 2.0});
  EXPECT_EQ(snapshot(net), before);
}

TEST(PolicyUpdate, GradientK3M2) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto cfg = small_policy();
    PolicyNetwork net(3, cfg);
    net.init(rng);
    const auto state = random_state(rng, 3, cfg.hidden_size);
    const auto q = draw(rng, 3, 0, 2);
    const std::vector<int> ids{2, 0};
    const auto r = draw(rng, 2, 0, 2);
    const auto rep = nd::check_gradients(
        [&] { return surrogate_value(policy_forward(net, state, q).probs, ids, r, cfg); },
        [&] { surrogate_backward(net, policy_forward(net, state, q), ids, r, cfg); }, net.parameters());
    ASSERT_TRUE(rep.passed()) << "seed " << seed << " err " << rep.max_error;
  }
}

TEST(PolicyUpdate, AscentRaisesSelectedProbability) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto cfg = small_policy();
    cfg.entropy_weight = 0.0;
    cfg.gamma = 1e-3;
    cfg.baseline = RewardBaseline::none;
    PolicyNetwork net(4, cfg);
    net.init(rng);
    const auto state = random_state(rng, 4, cfg.hidden_size);
    const auto q = normalize_input(draw(rng, 4, 0, 2), cfg.input_norm);
    const int id = static_cast<int>(seed % 4);
    const auto fwd = policy_forward(net, state, q);
    nd::AdamState adam;
    const std::vector<int> ids{id};
    policy_update(net, adam, cfg, fwd, ids, std::vector<double>{draw(rng, 1, 0.1, 3.0)[0]});
    ASSERT_GT(policy_forward(net, state, q).probs[id], fwd.probs[id]) << "seed " << seed;
  }
}

TEST(PolicyUpdate, ZscoreKeepsSimplexAndDeterminism) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    PolicyNetwork net(6, small_policy());
    net.init(rng);
    const auto state = random_state(rng, 6, 8);
    const auto raw = draw(rng, 6, 0, 50);
    const auto z = normalize_input(raw, InputNorm::zscore);
    const auto a = policy_forward(net, state, z), b = policy_forward(net, state, z);
    ASSERT_TRUE(is_simplex(a.probs));
    ASSERT_EQ(a.probs, b.probs);
  }
  const auto flat = normalize_input(std::vector<double>{2, 2, 2}, InputNorm::zscore);
  EXPECT_EQ(flat, (std::vector<double>{0, 0, 0}));
}

TEST(AmsSampler, ObserveBeforeProposeRejected) {
  AmsSampler s(3, small_policy(), 1);
  EXPECT_THROW(s.observe(std::vector<int>{0}, std::vector<double>{1.0}), ConfigError);
}

TEST(AmsSampler, CheckpointRoundTripResumesIdentically) {
  auto cfg = small_policy();
  AmsSampler a(4, cfg, 9);
  QueryLossBuffer buf(4);
  Rng rng(1);
  auto step = [&](Sampler& s, QueryLossBuffer& b, Rng& r) {
    const auto p = s.propose(b);
    const auto ids = select_domains(p, 2, s.selection(), r);
    const auto l = draw(r, 2, 0, 2);
    b.update(ids, l);
    s.observe(ids, l);
    return p;
  };
  for (int i = 0; i < 10; ++i) step(a, buf, rng);
  AmsSampler b(4, cfg, 12345);
  policy_from_json(b, policy_to_json(a));
  EXPECT_EQ(b.state(), a.state());
  QueryLossBuffer buf_b = buf;
  Rng rng_b = rng;
  for (int i = 0; i < 5; ++i) ASSERT_EQ(step(a, buf, rng), step(b, buf_b, rng_b));
}

TEST(AmsSampler, CheckpointRejectsMismatch) {
  AmsSampler a(4, small_policy(), 9);
  AmsSampler b(5, small_policy(), 9);
  EXPECT_THROW(policy_from_json(b, policy_to_json(a)), ConfigError);
  EXPECT_THROW(policy_from_json(b, "{}"), ConfigError);
}
