#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ams/ndcore/attention.hpp"
#include "ams/ndcore/linear.hpp"
#include "ams/ndcore/lstm.hpp"
#include "ams/ndcore/optim.hpp"
#include "ams/rng.hpp"
#include "ams/sampling/selection.hpp"

namespace ams::sampling {

enum class InputNorm { zscore, raw };
enum class Surrogate { prob_weighted, logprob_weighted };
enum class EntropyMode { bonus, penalty };
/// What the policy receives as reward for each selected domain.
enum class RewardBaseline { none, batch_mean };

std::string to_string(InputNorm v);
std::string to_string(Surrogate v);
std::string to_string(EntropyMode v);
std::string to_string(RewardBaseline v);
InputNorm input_norm_from_string(const std::string& s);
Surrogate surrogate_from_string(const std::string& s);
EntropyMode entropy_mode_from_string(const std::string& s);
RewardBaseline baseline_from_string(const std::string& s);

struct PolicyConfig {
  double gamma = 0.035;
  double entropy_weight = 0.1;
  EntropyMode entropy_mode = EntropyMode::bonus;
  SelectionMode selection = SelectionMode::top_m;
  InputNorm input_norm = InputNorm::zscore;
  Surrogate surrogate = Surrogate::prob_weighted;
  RewardBaseline baseline = RewardBaseline::batch_mean;
  std::size_t attention_size = 16;
  std::size_t input_size = 32;
  std::size_t hidden_size = 100;

  void validate() const;
  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

/// Attention over per-domain features [Q_k, P_k] -> 2K context -> linear
/// projection -> LSTM -> linear head -> softmax over K domains.
struct PolicyNetwork {
  PolicyNetwork() = default;
  PolicyNetwork(std::size_t K, const PolicyConfig& cfg);

  void init(Rng& rng);
  /// Every parameter set to zero; the output is then exactly uniform.
  void zero_parameters();

  std::size_t K() const { return head.out(); }
  nd::ParameterList parameters();
  std::vector<const nd::Parameter*> parameters() const;

  nd::AttentionUnit attention;
  nd::LinearLayer projection;
  nd::LstmCell lstm;
  nd::LinearLayer head;
};

struct PolicyState {
  nd::Tensor h;
  nd::Tensor c;
  std::vector<double> p_prev;
  std::int64_t step = 0;

  static PolicyState initial(std::size_t K, std::size_t hidden_size);
  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

/// Everything one forward pass needs for its backward pass.
struct PolicyForward {
  std::vector<double> probs;
  PolicyState next;

  nd::Tensor features;
  nd::AttentionOutput attention;
  nd::Tensor projected;
  nd::LstmStep lstm;
  nd::Tensor probs_tensor;
};

/// Applies the configured input normalisation to the loss buffer.
std::vector<double> normalize_input(std::span<const double> losses, InputNorm mode);

/// Pure in (net, state, input). Throws NumericError on non-finite input.
PolicyForward policy_forward(const PolicyNetwork& net, const PolicyState& state,
                             std::span<const double> q_input);

/// S = sum_j w(P_{t_j}) r_j +/- lambda_H H(P), with w(P) = P or log P.
double surrogate_value(std::span<const double> probs, std::span<const int> ids,
                       std::span<const double> rewards, const PolicyConfig& cfg);

/// Accumulates dS/dphi into the network's grads. The LSTM's incoming state is
/// treated as a constant (one-step truncated backpropagation).
void surrogate_backward(PolicyNetwork& net, const PolicyForward& fwd, std::span<const int> ids,
                        std::span<const double> rewards, const PolicyConfig& cfg);

/// One Adam ascent step on S with learning rate gamma. Rewards are detached
/// scalars. Throws NumericError for a non-finite surrogate.
double policy_update(PolicyNetwork& net, nd::AdamState& adam, const PolicyConfig& cfg,
                     const PolicyForward& fwd, std::span<const int> ids,
                     std::span<const double> rewards);

}  // namespace ams::sampling
