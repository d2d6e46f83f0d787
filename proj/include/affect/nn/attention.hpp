#pragma once

#include <vector>

#include "affect/nn/layers.hpp"
#include "affect/nn/module.hpp"

namespace affect::nn {

// Multi-head scaled dot-product self-attention with a key padding mask.
// Padded positions (mask value 0) are excluded as attention keys, so a real
// token's output never depends on padding content.
class MultiheadSelfAttention {
 public:
  MultiheadSelfAttention(std::string name, int d_model, int heads);

  void init(Rng& rng);

  // x: (B, T, D); key_mask: (B, T) with 1 = real token, 0 = padding.
  Tensor forward(const Tensor& x, const Tensor& key_mask);
  Tensor backward(const Tensor& dy);

  void params(ParamRefs& out);
  void state(StateRefs& out);

 private:
  int d_model_, heads_, head_dim_;
  Linear wq_, wk_, wv_, wo_;

  // caches
  Tensor q_, k_, v_, attn_, concat_;
  Tensor mask_;
};

}  // namespace affect::nn
