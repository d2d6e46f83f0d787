#include "affect/nn/optim.hpp"

#include <cmath>

namespace affect::nn {

double SgdMomentum::step(const ParamRefs& params) {
  const double norm = grad_norm(params);
  float scale = 1.0f;
  if (cfg_.clip_norm > 0.0f && norm > cfg_.clip_norm)
    scale = static_cast<float>(cfg_.clip_norm / norm);

  for (auto* p : params) {
    auto [it, inserted] = velocity_.try_emplace(p, Tensor{});
    if (inserted) it->second = Tensor(p->value.shape());
    auto v = it->second.vec();
    v = cfg_.momentum * v + scale * p->grad.vec();
    p->value.vec() -= cfg_.lr * v;
  }
  return norm;
}

}  // namespace affect::nn
