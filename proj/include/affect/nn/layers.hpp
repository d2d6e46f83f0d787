#pragma once

#include <string>
#include <vector>

#include "affect/nn/module.hpp"
#include "affect/rng.hpp"
#include "affect/tensor.hpp"

namespace affect::nn {

// Layers cache whatever the matching backward pass needs; each instance is
// single-stream (forward then backward, no reentrancy).

class Linear {
 public:
  Linear(std::string name, int in_dim, int out_dim);

  void init(Rng& rng);
  // x: (rows, in) -> (rows, out)
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

  void params(ParamRefs& out);
  void state(StateRefs& out);

 private:
  int in_dim_, out_dim_;
  Parameter weight_;  // (out, in)
  Parameter bias_;    // (out)
  Tensor cached_x_;
};

class Conv2d {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad);

  void init(Rng& rng);
  // x: (N, C, H, W) -> (N, out, H', W')
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  void params(ParamRefs& out);
  void state(StateRefs& out);

 private:
  void im2col(const float* x, float* cols, int h, int w, int ho, int wo) const;
  void col2im(const float* cols, float* dx, int h, int w, int ho, int wo) const;

  int in_ch_, out_ch_, kernel_, stride_, pad_;
  Parameter weight_;  // (out, in*k*k)
  Parameter bias_;    // (out)
  Tensor cached_x_;
};

// Temporal convolution over explicit tap offsets (dilated contexts). Zero
// padding keeps the output length equal to the input length.
class Conv1d {
 public:
  Conv1d(std::string name, int in_ch, int out_ch, std::vector<int> offsets);

  void init(Rng& rng);
  // x: (N, C, T) -> (N, out, T)
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  const std::vector<int>& offsets() const { return offsets_; }

  void params(ParamRefs& out);
  void state(StateRefs& out);

 private:
  int in_ch_, out_ch_;
  std::vector<int> offsets_;
  Parameter weight_;  // (out, in*taps)
  Parameter bias_;
  Tensor cached_x_;
};

// Batch normalization over (N, C, L): statistics per channel across N and L.
class BatchNorm {
 public:
  BatchNorm(std::string name, int channels, float eps = 1e-5f, float momentum = 0.1f);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  void params(ParamRefs& out);
  void state(StateRefs& out);

 private:
  int channels_;
  float eps_, momentum_;
  Parameter gamma_, beta_;
  Tensor running_mean_, running_var_;
  std::string name_;

  // train-mode caches
  Tensor cached_xhat_;
  std::vector<float> batch_inv_std_;
  bool cached_train_ = false;
};

// Layer normalization over the last dimension of (rows, dim).
class LayerNorm {
 public:
  LayerNorm(std::string name, int dim, float eps = 1e-5f);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  void params(ParamRefs& out);
  void state(StateRefs& out);

 private:
  int dim_;
  float eps_;
  Parameter gamma_, beta_;
  Tensor cached_xhat_;
  std::vector<float> inv_std_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor cached_x_;
};

class Dropout {
 public:
  explicit Dropout(float p) : p_(p) {}

  Tensor forward(const Tensor& x, bool train, Rng* rng);
  Tensor backward(const Tensor& dy);

  float p() const { return p_; }

 private:
  float p_;
  Tensor mask_;
  bool identity_ = true;
};

// Row-wise softmax with max-subtraction; used by attention and heads.
void softmax_rows_inplace(MatMap m);
Tensor softmax_rows(const Tensor& x, int rows, int cols);

}  // namespace affect::nn
