#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "moodnet/errors.hpp"
#include "moodnet/named_tensors.hpp"
#include "moodnet/tensor.hpp"

namespace moodnet {

/// Cross-entropy against a hard label: -log(p[label]) with the probability
/// clamped below at 1e-12 so a confidently wrong prediction stays finite.
template <typename T>
double cross_entropy(const Tensor<T>& probs, Index label) {
  if (probs.rank() != 1) {
    throw ShapeError("cross_entropy expects a rank-1 probability vector, got " +
                     detail::shape_str(probs.shape()));
  }
  if (label < 0 || label >= probs.size()) {
    throw InputError("cross_entropy label " + std::to_string(label) + " out of range [0, " +
                     std::to_string(probs.size()) + ")");
  }
  const double p = std::max(static_cast<double>(probs[label]), 1e-12);
  return -std::log(p);
}

/// Gradient of cross-entropy w.r.t. the logits when the probabilities came
/// from a softmax: p - onehot(label). Taking this fused form avoids the
/// ill-conditioned dLoss/dProbs intermediate entirely.
template <typename T>
Tensor<T> softmax_ce_grad(const Tensor<T>& probs, Index label) {
  if (probs.rank() != 1) {
    throw ShapeError("softmax_ce_grad expects a rank-1 probability vector, got " +
                     detail::shape_str(probs.shape()));
  }
  if (label < 0 || label >= probs.size()) {
    throw InputError("softmax_ce_grad label " + std::to_string(label) + " out of range [0, " +
                     std::to_string(probs.size()) + ")");
  }
  Tensor<T> g = probs;
  g[label] -= T{1};
  return g;
}

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline void validate_adam_config(const AdamConfig& cfg) {
  if (!(cfg.alpha >= 0.0)) throw ConfigError("adam alpha must be >= 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0) throw ConfigError("adam beta1 must be in [0, 1)");
  if (cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) throw ConfigError("adam beta2 must be in [0, 1)");
  if (cfg.epsilon <= 0.0) throw ConfigError("adam epsilon must be > 0");
}

/// First/second moment estimates plus the shared step counter.
template <typename T>
struct AdamState {
  NamedTensors<T> m;
  NamedTensors<T> v;
  std::int64_t t = 0;

  static AdamState<T> init(const NamedTensors<T>& params) {
    return AdamState<T>{params.zeros_like(), params.zeros_like(), 0};
  }
};

/// One update over every parameter:
///   t += 1
///   m = beta1*m + (1-beta1)*g         v = beta2*v + (1-beta2)*g^2
///   mhat = m / (1 - beta1^t)          vhat = v / (1 - beta2^t)
///   theta -= alpha * mhat / (sqrt(vhat) + epsilon)
/// Moment math runs in double regardless of T. A non-finite gradient anywhere
/// aborts before any parameter or moment is touched.
template <typename T>
void adam_step(NamedTensors<T>& params, const NamedTensors<T>& grads, AdamState<T>& state,
               const AdamConfig& cfg) {
  validate_adam_config(cfg);
  detail::require_congruent(params, grads, "adam_step params/grads");
  detail::require_congruent(params, state.m, "adam_step params/m");
  detail::require_congruent(params, state.v, "adam_step params/v");

  for (const auto& [name, g] : grads) {
    if (!all_finite(g)) {
      throw TrainingError("non-finite gradient for parameter " + name);
    }
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  auto ip = params.begin();
  auto ig = grads.begin();
  auto im = state.m.begin();
  auto iv = state.v.begin();
  for (; ip != params.end(); ++ip, ++ig, ++im, ++iv) {
    Tensor<T>& theta = ip->second;
    const Tensor<T>& g = ig->second;
    Tensor<T>& m = im->second;
    Tensor<T>& v = iv->second;
    for (Index i = 0; i < theta.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      theta[i] = static_cast<T>(static_cast<double>(theta[i]) -
                                cfg.alpha * mhat / (std::sqrt(vhat) + cfg.epsilon));
    }
  }
}

}  // namespace moodnet
