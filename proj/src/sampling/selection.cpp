#include "ams/sampling/selection.hpp"

#include <algorithm>
#include <numeric>

#include "ams/error.hpp"

namespace ams::sampling {

std::string to_string(SelectionMode mode) {
  return mode == SelectionMode::top_m ? "top-m" : "stochastic";
}

SelectionMode selection_from_string(const std::string& s) {
  if (s == "top-m") return SelectionMode::top_m;
  if (s == "stochastic") return SelectionMode::stochastic;
  throw ConfigError("unknown selection mode '" + s + "'");
}

std::vector<int> select_domains(std::span<const double> probs, std::size_t M, SelectionMode mode,
                                Rng& rng) {
  const std::size_t K = probs.size();
  if (M > K) {
    throw ConfigError("cannot select M=" + std::to_string(M) + " of K=" + std::to_string(K) +
                      " domains");
  }
  std::vector<int> chosen;
  chosen.reserve(M);

  if (mode == SelectionMode::top_m) {
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
    });
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(M));
    return chosen;
  }

  std::vector<double> weight(probs.begin(), probs.end());
  std::vector<bool> taken(K, false);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t m = 0; m < M; ++m) {
    double mass = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (!taken[k]) mass += std::max(weight[k], 0.0);
    }
    std::size_t pick = K;
    const double u = unit(rng);
    if (mass > 0.0) {
      const double target = u * mass;
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        if (taken[k] || weight[k] <= 0.0) continue;
        acc += weight[k];
        pick = k;
        if (target < acc) break;
      }
    } else {
      const auto left = static_cast<std::size_t>(
          std::count(taken.begin(), taken.end(), false));
      auto nth = std::min(left - 1, static_cast<std::size_t>(u * static_cast<double>(left)));
      for (std::size_t k = 0; k < K; ++k) {
        if (taken[k]) continue;
        if (nth == 0) {
          pick = k;
          break;
        }
        --nth;
      }
    }
    taken[pick] = true;
    chosen.push_back(static_cast<int>(pick));
  }
  return chosen;
}

}  // namespace ams::sampling
