#pragma once

#include <string>
#include <utility>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::nn {

// One trainable tensor plus its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor(value.shape());
  }

  void zero_grad() { grad.zero(); }
};

using ParamRefs = std::vector<Parameter*>;
// Named views over every tensor a model persists (parameters and buffers
// such as normalization running statistics), in a fixed serialization order.
using StateRefs = std::vector<std::pair<std::string, Tensor*>>;

inline void zero_grads(const ParamRefs& params) {
  for (auto* p : params) p->zero_grad();
}

inline double grad_norm(const ParamRefs& params) {
  double sq = 0.0;
  for (const auto* p : params) sq += static_cast<double>(p->grad.vec().squaredNorm());
  return std::sqrt(sq);
}

}  // namespace affect::nn
