#include "ams/sampling/policy.hpp"

#include <cmath>

#include "ams/error.hpp"
#include "ams/ndcore/softmax.hpp"

namespace ams::sampling {

std::string to_string(InputNorm v) { return v == InputNorm::zscore ? "zscore" : "raw"; }
std::string to_string(Surrogate v) { return v == Surrogate::prob_weighted ? "prob" : "logprob"; }
std::string to_string(EntropyMode v) { return v == EntropyMode::bonus ? "bonus" : "penalty"; }
std::string to_string(RewardBaseline v) { return v == RewardBaseline::none ? "none" : "batch-mean"; }

InputNorm input_norm_from_string(const std::string& s) {
  if (s == "zscore") return InputNorm::zscore;
  if (s == "raw") return InputNorm::raw;
  throw ConfigError("unknown input normalisation '" + s + "'");
}

Surrogate surrogate_from_string(const std::string& s) {
  if (s == "prob") return Surrogate::prob_weighted;
  if (s == "logprob") return Surrogate::logprob_weighted;
  throw ConfigError("unknown surrogate '" + s + "'");
}

EntropyMode entropy_mode_from_string(const std::string& s) {
  if (s == "bonus") return EntropyMode::bonus;
  if (s == "penalty") return EntropyMode::penalty;
  throw ConfigError("unknown entropy mode '" + s + "'");
}

RewardBaseline baseline_from_string(const std::string& s) {
  if (s == "none") return RewardBaseline::none;
  if (s == "batch-mean") return RewardBaseline::batch_mean;
  throw ConfigError("unknown reward baseline '" + s + "'");
}

void PolicyConfig::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("policy.gamma must be >= 0");
  if (!(entropy_weight >= 0.0)) throw ConfigError("policy.entropy_weight must be >= 0");
  if (attention_size == 0 || input_size == 0 || hidden_size == 0) {
    throw ConfigError("policy layer sizes must be positive");
  }
}

PolicyNetwork::PolicyNetwork(std::size_t K, const PolicyConfig& cfg)
    : attention(2, cfg.attention_size, "policy.attention"),
      projection(2 * K, cfg.input_size, "policy.projection"),
      lstm(cfg.input_size, cfg.hidden_size, "policy.lstm"),
      head(cfg.hidden_size, K, "policy.head") {
  if (K == 0) throw DimensionError("policy network needs K >= 1");
}

void PolicyNetwork::init(Rng& rng) {
  attention.init_uniform(rng);
  projection.init_uniform(rng);
  lstm.init_uniform(rng);
  head.init_uniform(rng);
}

void PolicyNetwork::zero_parameters() {
  for (nd::Parameter* p : parameters()) {
    p->value.fill(0.0);
    p->zero_grad();
  }
}

nd::ParameterList PolicyNetwork::parameters() {
  nd::ParameterList out;
  for (nd::Parameter* p : attention.parameters()) out.push_back(p);
  for (nd::Parameter* p : projection.parameters()) out.push_back(p);
  for (nd::Parameter* p : lstm.parameters()) out.push_back(p);
  for (nd::Parameter* p : head.parameters()) out.push_back(p);
  return out;
}

std::vector<const nd::Parameter*> PolicyNetwork::parameters() const {
  const nd::ParameterList mutable_list = const_cast<PolicyNetwork*>(this)->parameters();
  return {mutable_list.begin(), mutable_list.end()};
}

PolicyState PolicyState::initial(std::size_t K, std::size_t hidden_size) {
  PolicyState s;
  s.h = nd::Tensor({hidden_size});
  s.c = nd::Tensor({hidden_size});
  s.p_prev.assign(K, 1.0 / static_cast<double>(K));
  return s;
}

std::vector<double> normalize_input(std::span<const double> losses, InputNorm mode) {
  std::vector<double> out(losses.begin(), losses.end());
  if (mode == InputNorm::raw || out.empty()) return out;
  double mean = 0.0;
  for (double q : out) mean += q;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double q : out) var += (q - mean) * (q - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (double& q : out) q = sd > 1e-12 ? (q - mean) / sd : 0.0;
  return out;
}

PolicyForward policy_forward(const PolicyNetwork& net, const PolicyState& state,
                             std::span<const double> q_input) {
  const std::size_t K = net.K();
  if (q_input.size() != K || state.p_prev.size() != K) {
    throw DimensionError("policy_forward: expected " + std::to_string(K) + " domains");
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(q_input[k]) || !std::isfinite(state.p_prev[k])) {
      throw NumericError("policy_forward: non-finite input");
    }
  }

  PolicyForward f;
  f.features = nd::Tensor({K, 2});
  for (std::size_t k = 0; k < K; ++k) {
    f.features.at(k, 0) = q_input[k];
    f.features.at(k, 1) = state.p_prev[k];
  }
  f.attention = nd::attention_forward(net.attention, f.features);
  f.projected = nd::linear_forward(net.projection, f.attention.context);
  f.lstm = nd::lstm_forward(net.lstm, f.projected, state.h, state.c);
  f.probs_tensor = nd::softmax(nd::linear_forward(net.head, f.lstm.y));
  f.probs = f.probs_tensor.storage();

  f.next.h = f.lstm.h;
  f.next.c = f.lstm.c;
  f.next.p_prev = f.probs;
  f.next.step = state.step + 1;
  return f;
}

namespace {

double entropy_sign(const PolicyConfig& cfg) {
  return cfg.entropy_mode == EntropyMode::bonus ? 1.0 : -1.0;
}

void check_selection(std::span<const double> probs, std::span<const int> ids,
                     std::span<const double> rewards) {
  if (ids.size() != rewards.size()) throw DimensionError("surrogate: ids/rewards length mismatch");
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= probs.size()) {
      throw IndexError("surrogate: domain id out of range");
    }
  }
}

}  // namespace

double surrogate_value(std::span<const double> probs, std::span<const int> ids,
                       std::span<const double> rewards, const PolicyConfig& cfg) {
  check_selection(probs, ids, rewards);
  double s = 0.0;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const double p = probs[static_cast<std::size_t>(ids[j])];
    s += (cfg.surrogate == Surrogate::prob_weighted ? p : std::log(p)) * rewards[j];
  }
  if (cfg.entropy_weight > 0.0) {
    double h = 0.0;
    for (double p : probs) {
      if (p > 0.0) h -= p * std::log(p);
    }
    s += entropy_sign(cfg) * cfg.entropy_weight * h;
  }
  return s;
}

void surrogate_backward(PolicyNetwork& net, const PolicyForward& fwd, std::span<const int> ids,
                        std::span<const double> rewards, const PolicyConfig& cfg) {
  check_selection(fwd.probs, ids, rewards);
  const std::size_t K = fwd.probs.size();
  nd::Tensor dprobs({K});
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const auto k = static_cast<std::size_t>(ids[j]);
    dprobs[k] += cfg.surrogate == Surrogate::prob_weighted ? rewards[j] : rewards[j] / fwd.probs[k];
  }
  if (cfg.entropy_weight > 0.0) {
    const double scale = entropy_sign(cfg) * cfg.entropy_weight;
    for (std::size_t k = 0; k < K; ++k) {
      if (fwd.probs[k] > 0.0) dprobs[k] += -scale * (std::log(fwd.probs[k]) + 1.0);
    }
  }

  const nd::Tensor dlogits = nd::softmax_backward(fwd.probs_tensor, dprobs);
  const nd::Tensor dy = nd::linear_backward(net.head, fwd.lstm.y, dlogits);
  const nd::LstmGrads lg =
      nd::lstm_backward(net.lstm, fwd.lstm.cache, dy, nd::Tensor({net.lstm.hidden_size()}));
  const nd::Tensor dcontext = nd::linear_backward(net.projection, fwd.attention.context, lg.dx);
  nd::attention_backward(net.attention, fwd.attention.cache, dcontext);
}

double policy_update(PolicyNetwork& net, nd::AdamState& adam, const PolicyConfig& cfg,
                     const PolicyForward& fwd, std::span<const int> ids,
                     std::span<const double> rewards) {
  const double s = surrogate_value(fwd.probs, ids, rewards, cfg);
  if (!std::isfinite(s)) throw NumericError("non-finite policy surrogate");
  const nd::ParameterList params = net.parameters();
  nd::zero_grads(params);
  surrogate_backward(net, fwd, ids, rewards, cfg);
  // Ascent on S is descent on -S.
  for (nd::Parameter* p : params) {
    for (double& g : p->grad.values()) g = -g;
  }
  nd::adam_step(adam, params, cfg.gamma);
  return s;
}

}  // namespace ams::sampling
