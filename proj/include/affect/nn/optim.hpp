#pragma once

#include <unordered_map>

#include "affect/nn/module.hpp"

namespace affect::nn {

struct SgdConfig {
  float lr = 0.001f;
  float momentum = 0.9f;
  // Global gradient-norm ceiling; <= 0 disables clipping.
  float clip_norm = 5.0f;
};

// Stochastic gradient descent with classical momentum:
//   v <- momentum * v + g;  p <- p - lr * v
// Velocity is keyed per parameter, so stepping only the active task's subset
// leaves every other parameter (and its momentum) untouched.
class SgdMomentum {
 public:
  explicit SgdMomentum(SgdConfig cfg) : cfg_(cfg) {}

  // Applies one update to the given subset and returns the pre-clip global
  // gradient norm of that subset.
  double step(const ParamRefs& params);

  const SgdConfig& config() const { return cfg_; }
  void set_lr(float lr) { cfg_.lr = lr; }

 private:
  SgdConfig cfg_;
  std::unordered_map<Parameter*, Tensor> velocity_;
};

}  // namespace affect::nn
