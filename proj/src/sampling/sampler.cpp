#include "ams/sampling/sampler.hpp"

#include <algorithm>

#include "ams/error.hpp"

namespace ams::sampling {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::uniform:
      return "uniform";
    case SamplerKind::ppq:
      return "ppq";
    case SamplerKind::ppql:
      return "ppql";
    case SamplerKind::ppaql:
      return "ppaql";
    case SamplerKind::ppeaql:
      return "ppeaql";
    case SamplerKind::ams:
      return "ams";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "uniform") return SamplerKind::uniform;
  if (s == "ppq") return SamplerKind::ppq;
  if (s == "ppql") return SamplerKind::ppql;
  if (s == "ppaql") return SamplerKind::ppaql;
  if (s == "ppeaql") return SamplerKind::ppeaql;
  if (s == "ams") return SamplerKind::ams;
  throw ConfigError("unknown sampler '" + s + "'");
}

std::string to_string(UnseenMode mode) { return mode == UnseenMode::floor ? "floor" : "optimistic"; }

UnseenMode unseen_from_string(const std::string& s) {
  if (s == "floor") return UnseenMode::floor;
  if (s == "optimistic") return UnseenMode::optimistic;
  throw ConfigError("unknown unseen-domain mode '" + s + "'");
}

void SamplerSpec::validate() const {
  if (window < 1) throw ConfigError("sampler.window must be >= 1");
  if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("sampler.decay must lie in (0, 1)");
  policy.validate();
}

std::vector<double> policy_rewards(std::span<const double> losses, RewardBaseline baseline) {
  std::vector<double> r(losses.begin(), losses.end());
  if (baseline == RewardBaseline::none || r.empty()) return r;
  double mean = 0.0;
  for (double l : r) mean += l;
  mean /= static_cast<double>(r.size());
  for (double& x : r) x -= mean;
  return r;
}

namespace {

/// Replaces the statistic of never-seen domains by the largest seen one.
std::vector<double> fill_unseen(std::vector<double> stat, const std::vector<bool>& seen,
                                UnseenMode mode) {
  if (mode == UnseenMode::floor) return stat;
  double best = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < stat.size(); ++k) {
    if (seen[k]) {
      best = any ? std::max(best, stat[k]) : stat[k];
      any = true;
    }
  }
  if (!any) return stat;
  for (std::size_t k = 0; k < stat.size(); ++k) {
    if (!seen[k]) stat[k] = best;
  }
  return stat;
}

class FixedSampler final : public Sampler {
 public:
  FixedSampler(std::string name, std::vector<double> probs, SelectionMode mode)
      : name_(std::move(name)), probs_(std::move(probs)), mode_(mode) {}
  std::string name() const override { return name_; }
  SelectionMode selection() const override { return mode_; }
  std::vector<double> propose(const QueryLossBuffer&) override { return probs_; }
  void observe(std::span<const int>, std::span<const double>) override {}

 private:
  std::string name_;
  std::vector<double> probs_;
  SelectionMode mode_;
};

class PpqlSampler final : public Sampler {
 public:
  PpqlSampler(std::size_t K, SelectionMode mode, UnseenMode unseen)
      : mode_(mode), unseen_(unseen), seen_(K, false) {}
  std::string name() const override { return "ppql"; }
  SelectionMode selection() const override { return mode_; }
  std::vector<double> propose(const QueryLossBuffer& buffer) override {
    std::vector<double> q(buffer.values().begin(), buffer.values().end());
    return ppql_probs(fill_unseen(std::move(q), seen_, unseen_));
  }
  void observe(std::span<const int> ids, std::span<const double>) override {
    for (int id : ids) seen_.at(static_cast<std::size_t>(id)) = true;
  }

 private:
  SelectionMode mode_;
  UnseenMode unseen_;
  std::vector<bool> seen_;
};

class PpaqlSampler final : public Sampler {
 public:
  PpaqlSampler(std::size_t K, std::size_t window, SelectionMode mode, UnseenMode unseen)
      : history_(K, window), mode_(mode), unseen_(unseen), seen_(K, false) {}
  std::string name() const override { return "ppaql"; }
  SelectionMode selection() const override { return mode_; }
  std::vector<double> propose(const QueryLossBuffer&) override {
    return ppql_probs(fill_unseen(history_.averages(), seen_, unseen_));
  }
  void observe(std::span<const int> ids, std::span<const double> losses) override {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      history_.record(ids[j], losses[j]);
      seen_.at(static_cast<std::size_t>(ids[j])) = true;
    }
  }

 private:
  WindowAverage history_;
  SelectionMode mode_;
  UnseenMode unseen_;
  std::vector<bool> seen_;
};

class PpeaqlSampler final : public Sampler {
 public:
  PpeaqlSampler(std::size_t K, double decay, SelectionMode mode, UnseenMode unseen)
      : average_(K, decay), mode_(mode), unseen_(unseen), seen_(K, false) {}
  std::string name() const override { return "ppeaql"; }
  SelectionMode selection() const override { return mode_; }
  std::vector<double> propose(const QueryLossBuffer&) override {
    std::vector<double> a(average_.averages().begin(), average_.averages().end());
    return ppql_probs(fill_unseen(std::move(a), seen_, unseen_));
  }
  void observe(std::span<const int> ids, std::span<const double> losses) override {
    for (std::size_t j = 0; j < ids.size(); ++j) {
      average_.record(ids[j], losses[j]);
      seen_.at(static_cast<std::size_t>(ids[j])) = true;
    }
  }

 private:
  ExpAverage average_;
  SelectionMode mode_;
  UnseenMode unseen_;
  std::vector<bool> seen_;
};

}  // namespace

AmsSampler::AmsSampler(std::size_t K, PolicyConfig cfg, std::uint64_t seed)
    : cfg_(cfg), net_(K, cfg), state_(PolicyState::initial(K, cfg.hidden_size)) {
  cfg_.validate();
  Rng rng(seed);
  net_.init(rng);
}

std::vector<double> AmsSampler::propose(const QueryLossBuffer& buffer) {
  const std::vector<double> input = normalize_input(buffer.values(), cfg_.input_norm);
  pending_ = std::make_unique<PolicyForward>(policy_forward(net_, state_, input));
  return pending_->probs;
}

void AmsSampler::observe(std::span<const int> ids, std::span<const double> losses) {
  if (!pending_) throw ConfigError("AmsSampler::observe called before propose");
  const std::vector<double> rewards = policy_rewards(losses, cfg_.baseline);
  policy_update(net_, adam_, cfg_, *pending_, ids, rewards);
  state_ = pending_->next;
  pending_.reset();
}

void AmsSampler::restore(PolicyNetwork net, PolicyState state, nd::AdamState adam) {
  net_ = std::move(net);
  state_ = std::move(state);
  adam_ = std::move(adam);
  pending_.reset();
}

std::unique_ptr<Sampler> make_sampler(const SamplerSpec& spec, std::span<const std::size_t> pool_sizes,
                                      std::size_t w, std::uint64_t seed) {
  spec.validate();
  const std::size_t K = pool_sizes.size();
  switch (spec.kind) {
    case SamplerKind::uniform:
      return std::make_unique<FixedSampler>("uniform", uniform_probs(K), spec.selection);
    case SamplerKind::ppq:
      return std::make_unique<FixedSampler>("ppq", ppq_probs(pool_sizes, w, spec.ppq_mode),
                                            spec.selection);
    case SamplerKind::ppql:
      return std::make_unique<PpqlSampler>(K, spec.selection, spec.unseen);
    case SamplerKind::ppaql:
      return std::make_unique<PpaqlSampler>(K, spec.window, spec.selection, spec.unseen);
    case SamplerKind::ppeaql:
      return std::make_unique<PpeaqlSampler>(K, spec.decay, spec.selection, spec.unseen);
    case SamplerKind::ams:
      return std::make_unique<AmsSampler>(K, spec.policy, seed);
  }
  throw ConfigError("unhandled sampler kind");
}

}  // namespace ams::sampling
