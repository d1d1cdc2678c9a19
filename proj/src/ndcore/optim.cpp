#include "ams/ndcore/optim.hpp"

#include <cmath>

#include "ams/error.hpp"

namespace ams::nd {

void require_finite_grads(const ParameterList& params) {
  for (const Parameter* p : params) {
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient for " + p->id);
  }
}

void sgd_step(const ParameterList& params, double lr) {
  require_finite_grads(params);
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) p->value[i] -= lr * p->grad[i];
    p->zero_grad();
  }
}

void adam_step(AdamState& state, const ParameterList& params, double lr) {
  require_finite_grads(params);
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (!m.same_shape(p.value)) throw DimensionError("adam moment shape mismatch for " + p.id);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
    p.zero_grad();
  }
}

}  // namespace ams::nd
