#include "ams/ndcore/attention.hpp"

#include <cmath>

#include "ams/error.hpp"
#include "ams/ndcore/softmax.hpp"

namespace ams::nd {

AttentionUnit::AttentionUnit(std::size_t feature_size, std::size_t attention_size,
                             const std::string& name)
    : weight(name + ".weight", Tensor({attention_size, feature_size})),
      bias(name + ".bias", Tensor({attention_size})),
      score(name + ".score", Tensor({attention_size})) {}

void AttentionUnit::init_uniform(Rng& rng, double scale) {
  const double wb = scale / std::sqrt(static_cast<double>(feature_size()));
  const double sb = scale / std::sqrt(static_cast<double>(attention_size()));
  std::uniform_real_distribution<double> wd(-wb, wb);
  std::uniform_real_distribution<double> sd(-sb, sb);
  for (double& w : weight.value.values()) w = wd(rng);
  for (double& s : score.value.values()) s = sd(rng);
  bias.value.fill(0.0);
}

AttentionOutput attention_forward(const AttentionUnit& unit, const Tensor& features) {
  const std::size_t f = unit.feature_size();
  const std::size_t a = unit.attention_size();
  if (features.rank() != 2 || features.dim(1) != f || features.dim(0) == 0) {
    throw DimensionError("attention: features shape " + features.shape_string() +
                         " expected [K x " + std::to_string(f) + "] with K >= 1");
  }
  const std::size_t k = features.dim(0);

  AttentionOutput out;
  out.cache.features = features;
  out.cache.hidden = Tensor({k, a});
  Tensor scores({k});
  for (std::size_t r = 0; r < k; ++r) {
    double e = 0.0;
    for (std::size_t m = 0; m < a; ++m) {
      double z = unit.bias.value[m];
      for (std::size_t c = 0; c < f; ++c) z += unit.weight.value.at(m, c) * features.at(r, c);
      const double t = std::tanh(z);
      out.cache.hidden.at(r, m) = t;
      e += unit.score.value[m] * t;
    }
    scores[r] = e;
  }
  out.weights = softmax(scores);
  out.cache.weights = out.weights;
  out.context = Tensor({k * f});
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < f; ++c) out.context[r * f + c] = out.weights[r] * features.at(r, c);
  }
  return out;
}

Tensor attention_backward(AttentionUnit& unit, const AttentionCache& cache, const Tensor& dcontext) {
  const std::size_t f = unit.feature_size();
  const std::size_t a = unit.attention_size();
  const std::size_t k = cache.features.dim(0);
  if (dcontext.size() != k * f) {
    throw DimensionError("attention backward: dcontext shape " + dcontext.shape_string());
  }

  Tensor dfeatures({k, f});
  Tensor dweights({k});
  for (std::size_t r = 0; r < k; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < f; ++c) {
      acc += dcontext[r * f + c] * cache.features.at(r, c);
      dfeatures.at(r, c) += cache.weights[r] * dcontext[r * f + c];
    }
    dweights[r] = acc;
  }
  const Tensor dscores = softmax_backward(cache.weights, dweights);

  for (std::size_t r = 0; r < k; ++r) {
    const double de = dscores[r];
    if (de == 0.0) continue;
    for (std::size_t m = 0; m < a; ++m) {
      const double t = cache.hidden.at(r, m);
      unit.score.grad[m] += de * t;
      const double dz = de * unit.score.value[m] * (1.0 - t * t);
      unit.bias.grad[m] += dz;
      for (std::size_t c = 0; c < f; ++c) {
        unit.weight.grad.at(m, c) += dz * cache.features.at(r, c);
        dfeatures.at(r, c) += dz * unit.weight.value.at(m, c);
      }
    }
  }
  return dfeatures;
}

}  // namespace ams::nd
