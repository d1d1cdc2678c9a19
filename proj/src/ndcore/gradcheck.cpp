#include "ams/ndcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ams/rng.hpp"

namespace ams::nd {

std::vector<Tensor> finite_difference_grad(const std::function<double()>& f,
                                           const ParameterList& params, double eps) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (Parameter* p : params) {
    Tensor g(p->value.shape());
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = f();
      p->value[i] = saved - eps;
      const double down = f();
      p->value[i] = saved;
      g[i] = (up - down) / (2.0 * eps);
    }
    out.push_back(std::move(g));
  }
  return out;
}

double gradient_error(double analytic, double numeric, double rel_tol, double abs_floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), abs_floor / rel_tol});
  return std::abs(analytic - numeric) / scale;
}

void GradCheckReport::merge(const GradCheckReport& other) {
  coords_checked += other.coords_checked;
  if (worst_param.empty() || other.max_error > max_error) {
    max_error = other.max_error;
    worst_param = other.worst_param;
    worst_index = other.worst_index;
    worst_analytic = other.worst_analytic;
    worst_numeric = other.worst_numeric;
  }
}

GradCheckReport check_gradients(const std::function<double()>& loss,
                                const std::function<void()>& backward,
                                const ParameterList& params, const GradCheckOptions& options) {
  zero_grads(params);
  backward();

  GradCheckReport report;
  Rng rng(options.seed);
  for (Parameter* p : params) {
    std::vector<std::size_t> coords(p->size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t i : coords) {
      const double saved = p->value[i];
      p->value[i] = saved + options.eps;
      const double up = loss();
      p->value[i] = saved - options.eps;
      const double down = loss();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double analytic = p->grad[i];
      const double err = gradient_error(analytic, numeric, options.rel_tol, options.abs_floor);
      ++report.coords_checked;
      if (report.worst_param.empty() || err > report.max_error) {
        report.max_error = err;
        report.worst_param = p->id;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  zero_grads(params);
  return report;
}

}  // namespace ams::nd
