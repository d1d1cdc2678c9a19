#pragma once

#include <span>
#include <vector>

namespace ams::harness {

/// 1-based ranks, tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

/// Spearman rank correlation (Pearson correlation of average ranks). Returns 0
/// when either side is constant. Throws std::invalid_argument when lengths
/// differ or are below 2.
double spearman(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> xs);
/// Sample standard deviation; 0 for fewer than two values.
double stddev(std::span<const double> xs);
double median(std::vector<double> xs);

}  // namespace ams::harness
