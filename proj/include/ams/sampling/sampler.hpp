#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ams/sampling/baselines.hpp"
#include "ams/sampling/buffer.hpp"
#include "ams/sampling/policy.hpp"
#include "ams/sampling/selection.hpp"

namespace ams::sampling {

enum class SamplerKind { uniform, ppq, ppql, ppaql, ppeaql, ams };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& s);

/// How loss-driven baselines score domains that have never been sampled.
/// `floor` leaves them at the loss floor; `optimistic` gives them the largest
/// statistic seen so far so every domain is tried at least once.
enum class UnseenMode { floor, optimistic };
std::string to_string(UnseenMode mode);
UnseenMode unseen_from_string(const std::string& s);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::uniform;
  /// Selection for the non-AMS samplers; AMS uses policy.selection.
  SelectionMode selection = SelectionMode::stochastic;
  std::size_t window = 10;
  double decay = 0.9;
  PpqMode ppq_mode = PpqMode::pool_size;
  UnseenMode unseen = UnseenMode::optimistic;
  PolicyConfig policy;

  void validate() const;
  friend bool operator==(const SamplerSpec&, const SamplerSpec&) = default;
};

class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string name() const = 0;
  virtual SelectionMode selection() const = 0;
  /// Sampling distribution for the coming iteration, given the current buffer.
  virtual std::vector<double> propose(const QueryLossBuffer& buffer) = 0;
  /// Losses of the domains just sampled (buffer already updated).
  virtual void observe(std::span<const int> ids, std::span<const double> losses) = 0;
};

class AmsSampler final : public Sampler {
 public:
  AmsSampler(std::size_t K, PolicyConfig cfg, std::uint64_t seed);

  std::string name() const override { return "ams"; }
  SelectionMode selection() const override { return cfg_.selection; }
  std::vector<double> propose(const QueryLossBuffer& buffer) override;
  void observe(std::span<const int> ids, std::span<const double> losses) override;

  const PolicyNetwork& network() const { return net_; }
  PolicyNetwork& network() { return net_; }
  const PolicyState& state() const { return state_; }
  const PolicyConfig& config() const { return cfg_; }
  const nd::AdamState& optimizer_state() const { return adam_; }
  void restore(PolicyNetwork net, PolicyState state, nd::AdamState adam);

 private:
  PolicyConfig cfg_;
  PolicyNetwork net_;
  PolicyState state_;
  nd::AdamState adam_;
  std::unique_ptr<PolicyForward> pending_;
};

/// Rewards handed to the policy for the selected domains' losses.
std::vector<double> policy_rewards(std::span<const double> losses, RewardBaseline baseline);

std::unique_ptr<Sampler> make_sampler(const SamplerSpec& spec, std::span<const std::size_t> pool_sizes,
                                      std::size_t w, std::uint64_t seed);

}  // namespace ams::sampling
