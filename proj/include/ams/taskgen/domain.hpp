#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ams/ndcore/tensor.hpp"

namespace ams::taskgen {

enum class Family { sinusoid, clusters };

/// One source or target domain. For sinusoid domains labels are
/// amplitude * sin(omega * x + phase) + N(0, noise_std^2); for cluster domains
/// each class is an isotropic Gaussian blob with std `overlap` around a mean on
/// a circle rotated by `phase`.
struct DomainSpec {
  int id = 0;
  std::string name;
  Family family = Family::sinusoid;
  double amplitude = 1.0;
  double omega = 1.0;
  double phase = 0.0;
  double noise_std = 0.0;
  int class_count = 3;
  double overlap = 0.5;
  std::size_t pool_size = 0;
  std::uint64_t rng_stream = 0;
  double x_min = -5.0;
  double x_max = 5.0;

  /// Scalar that orders domains by how hard they are to fit; monotone in
  /// every difficulty parameter of the family.
  double difficulty() const;
  /// Noiseless generative function (sinusoid only).
  double clean_label(double x) const;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

std::size_t input_dim(Family family);
std::size_t output_dim(Family family, int class_count);

struct Example {
  std::vector<double> input;
  std::vector<double> target;  // regression target; empty for classification
  int label = -1;              // class index; -1 for regression
};

/// A sampled task: w examples split evenly into disjoint support and query halves.
struct TaskInstance {
  int domain_id = 0;
  std::vector<Example> support;
  std::vector<Example> query;
  /// Pool indices of the drawn examples, support first.
  std::vector<std::size_t> indices;
};

/// Row-stacked examples ready for a forward pass.
struct Batch {
  nd::Tensor inputs;   // [n x in]
  nd::Tensor targets;  // [n x out] for regression, empty otherwise
  std::vector<int> labels;
  std::size_t rows() const { return inputs.rank() ? inputs.dim(0) : 0; }
};

Batch make_batch(std::span<const Example> examples);
Batch concat_batches(const Batch& a, const Batch& b);

std::string to_string(Family family);
Family family_from_string(const std::string& s);

}  // namespace ams::taskgen
