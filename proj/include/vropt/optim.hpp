#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "vropt/errors.hpp"
#include "vropt/vec.hpp"

namespace vropt {

struct SgdHyper {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("SgdHyper: lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
      throw std::invalid_argument("SgdHyper: momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0))
      throw std::invalid_argument("SgdHyper: weight_decay must be >= 0");
  }
};

struct SgdState {
  ParamVector velocity;

  static SgdState zeros(std::size_t d) { return SgdState{ParamVector(d, 0.0)}; }
};

/// velocity <- mu * velocity + g;  theta <- theta - lr * velocity - wd * theta.
/// The decay term is -wd * theta, not scaled by lr.
inline void sgd_step(ParamVector& params, const ParamVector& grad, SgdState& state,
                     const SgdHyper& hyper) {
  detail::require_same_length(params.size(), grad.size(), "sgd_step");
  detail::require_same_length(params.size(), state.velocity.size(), "sgd_step state");
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.velocity[i] = hyper.momentum * state.velocity[i] + grad[i];
    params[i] = params[i] - hyper.lr * state.velocity[i] - hyper.weight_decay * params[i];
  }
}

struct AdamwHyper {
  double lr = 4e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  bool bias_correction = false;

  void validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("AdamwHyper: lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0))
      throw std::invalid_argument("AdamwHyper: beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0))
      throw std::invalid_argument("AdamwHyper: beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("AdamwHyper: eps must be > 0");
    if (!(weight_decay >= 0.0))
      throw std::invalid_argument("AdamwHyper: weight_decay must be >= 0");
  }
};

struct AdamwState {
  ParamVector m;
  ParamVector v;
  std::int64_t step = 0;

  static AdamwState zeros(std::size_t d) {
    return AdamwState{ParamVector(d, 0.0), ParamVector(d, 0.0), 0};
  }
};

/// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
/// theta <- theta - lr * m / (sqrt(v) + eps) - wd * theta.
/// Runs without bias correction by default; with the flag on, m and v are
/// divided by (1 - b^step) before the update.
inline void adamw_step(ParamVector& params, const ParamVector& grad,
                       AdamwState& state, const AdamwHyper& hyper) {
  detail::require_same_length(params.size(), grad.size(), "adamw_step");
  detail::require_same_length(params.size(), state.m.size(), "adamw_step state");
  ++state.step;
  double c1 = 1.0, c2 = 1.0;
  if (hyper.bias_correction) {
    c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
    c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grad[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
    double mhat = hyper.bias_correction ? state.m[i] / c1 : state.m[i];
    double vhat = hyper.bias_correction ? state.v[i] / c2 : state.v[i];
    params[i] = params[i] - hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps) -
                hyper.weight_decay * params[i];
  }
}

}  // namespace vropt
