#include "affect/nn/layers.hpp"

#include <cmath>

#include "affect/errors.hpp"

namespace affect::nn {

namespace {

float he_std(int fan_in) { return std::sqrt(2.0f / static_cast<float>(fan_in)); }

}  // namespace

// ---------------------------------------------------------------- Linear

Linear::Linear(std::string name, int in_dim, int out_dim)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      weight_(name + ".weight", Tensor({out_dim, in_dim})),
      bias_(name + ".bias", Tensor({out_dim})) {}

void Linear::init(Rng& rng) {
  const float s = he_std(in_dim_);
  for (auto& v : weight_.value.raw()) v = rng.normal(0.0f, s);
  bias_.value.zero();
}

Tensor Linear::forward(const Tensor& x) {
  const int rows = static_cast<int>(x.size() / in_dim_);
  cached_x_ = x;
  Tensor y({rows, out_dim_});
  auto ym = y.mat(rows, out_dim_);
  ym.noalias() =
      x.mat(rows, in_dim_) * weight_.value.mat(out_dim_, in_dim_).transpose();
  ym.rowwise() += bias_.value.vec().transpose();
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  const int rows = static_cast<int>(dy.size() / out_dim_);
  auto dym = dy.mat(rows, out_dim_);
  auto xm = cached_x_.mat(rows, in_dim_);
  weight_.grad.mat(out_dim_, in_dim_).noalias() += dym.transpose() * xm;
  bias_.grad.vec() += dym.colwise().sum().transpose();
  Tensor dx(cached_x_.shape());
  dx.mat(rows, in_dim_).noalias() = dym * weight_.value.mat(out_dim_, in_dim_);
  return dx;
}

void Linear::params(ParamRefs& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Linear::state(StateRefs& out) {
  out.emplace_back(weight_.name, &weight_.value);
  out.emplace_back(bias_.name, &bias_.value);
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      weight_(name + ".weight", Tensor({out_ch, in_ch * kernel * kernel})),
      bias_(name + ".bias", Tensor({out_ch})) {}

void Conv2d::init(Rng& rng) {
  const float s = he_std(in_ch_ * kernel_ * kernel_);
  for (auto& v : weight_.value.raw()) v = rng.normal(0.0f, s);
  bias_.value.zero();
}

void Conv2d::im2col(const float* x, float* cols, int h, int w, int ho, int wo) const {
  const int k = kernel_;
  for (int c = 0; c < in_ch_; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = cols + (static_cast<std::ptrdiff_t>((c * k + ky) * k + kx)) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= h) {
            std::fill(row + oy * wo, row + (oy + 1) * wo, 0.0f);
            continue;
          }
          const float* src = x + (static_cast<std::ptrdiff_t>(c) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride_ - pad_ + kx;
            row[oy * wo + ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void Conv2d::col2im(const float* cols, float* dx, int h, int w, int ho, int wo) const {
  const int k = kernel_;
  for (int c = 0; c < in_ch_; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row = cols + (static_cast<std::ptrdiff_t>((c * k + ky) * k + kx)) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride_ - pad_ + ky;
          if (iy < 0 || iy >= h) continue;
          float* dst = dx + (static_cast<std::ptrdiff_t>(c) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride_ - pad_ + kx;
            if (ix >= 0 && ix < w) dst[ix] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.ndim() != 4 || x.dim(1) != in_ch_)
    throw ContractError("conv2d input must be (N, C, H, W)");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = (h + 2 * pad_ - kernel_) / stride_ + 1;
  const int wo = (w + 2 * pad_ - kernel_) / stride_ + 1;
  cached_x_ = x;

  const int crows = in_ch_ * kernel_ * kernel_;
  Tensor cols({crows, ho * wo});
  Tensor y({n, out_ch_, ho, wo});
  auto wm = weight_.value.mat(out_ch_, crows);
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + static_cast<std::ptrdiff_t>(i) * in_ch_ * h * w, cols.data(), h, w, ho, wo);
    MatMap ym(y.data() + static_cast<std::ptrdiff_t>(i) * out_ch_ * ho * wo, out_ch_, ho * wo);
    ym.noalias() = wm * cols.mat(crows, ho * wo);
    ym.colwise() += bias_.value.vec();
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = cached_x_;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = dy.dim(2), wo = dy.dim(3);
  const int crows = in_ch_ * kernel_ * kernel_;

  Tensor cols({crows, ho * wo});
  Tensor dcols({crows, ho * wo});
  Tensor dx(x.shape());
  auto wm = weight_.value.mat(out_ch_, crows);
  auto dwm = weight_.grad.mat(out_ch_, crows);
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + static_cast<std::ptrdiff_t>(i) * in_ch_ * h * w, cols.data(), h, w, ho, wo);
    ConstMatMap dym(dy.data() + static_cast<std::ptrdiff_t>(i) * out_ch_ * ho * wo, out_ch_, ho * wo);
    dwm.noalias() += dym * cols.mat(crows, ho * wo).transpose();
    bias_.grad.vec() += dym.rowwise().sum();
    dcols.mat(crows, ho * wo).noalias() = wm.transpose() * dym;
    col2im(dcols.data(), dx.data() + static_cast<std::ptrdiff_t>(i) * in_ch_ * h * w, h, w, ho, wo);
  }
  return dx;
}

void Conv2d::params(ParamRefs& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Conv2d::state(StateRefs& out) {
  out.emplace_back(weight_.name, &weight_.value);
  out.emplace_back(bias_.name, &bias_.value);
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::string name, int in_ch, int out_ch, std::vector<int> offsets)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      offsets_(std::move(offsets)),
      weight_(name + ".weight",
              Tensor({out_ch, in_ch * static_cast<int>(offsets_.size())})),
      bias_(name + ".bias", Tensor({out_ch})) {
  if (offsets_.empty()) throw ContractError("conv1d needs at least one tap");
}

void Conv1d::init(Rng& rng) {
  const float s = he_std(in_ch_ * static_cast<int>(offsets_.size()));
  for (auto& v : weight_.value.raw()) v = rng.normal(0.0f, s);
  bias_.value.zero();
}

Tensor Conv1d::forward(const Tensor& x) {
  if (x.ndim() != 3 || x.dim(1) != in_ch_)
    throw ContractError("conv1d input must be (N, C, T)");
  const int n = x.dim(0), t = x.dim(2);
  const int taps = static_cast<int>(offsets_.size());
  const int crows = in_ch_ * taps;
  cached_x_ = x;

  Tensor cols({crows, t});
  Tensor y({n, out_ch_, t});
  auto wm = weight_.value.mat(out_ch_, crows);
  for (int i = 0; i < n; ++i) {
    const float* xi = x.data() + static_cast<std::ptrdiff_t>(i) * in_ch_ * t;
    for (int c = 0; c < in_ch_; ++c) {
      for (int j = 0; j < taps; ++j) {
        float* row = cols.data() + static_cast<std::ptrdiff_t>(c * taps + j) * t;
        const int off = offsets_[j];
        for (int s = 0; s < t; ++s) {
          const int src = s + off;
          row[s] = (src >= 0 && src < t) ? xi[c * t + src] : 0.0f;
        }
      }
    }
    MatMap ym(y.data() + static_cast<std::ptrdiff_t>(i) * out_ch_ * t, out_ch_, t);
    ym.noalias() = wm * cols.mat(crows, t);
    ym.colwise() += bias_.value.vec();
  }
  return y;
}

Tensor Conv1d::backward(const Tensor& dy) {
  const Tensor& x = cached_x_;
  const int n = x.dim(0), t = x.dim(2);
  const int taps = static_cast<int>(offsets_.size());
  const int crows = in_ch_ * taps;

  Tensor cols({crows, t});
  Tensor dcols({crows, t});
  Tensor dx(x.shape());
  auto wm = weight_.value.mat(out_ch_, crows);
  auto dwm = weight_.grad.mat(out_ch_, crows);
  for (int i = 0; i < n; ++i) {
    const float* xi = x.data() + static_cast<std::ptrdiff_t>(i) * in_ch_ * t;
    for (int c = 0; c < in_ch_; ++c) {
      for (int j = 0; j < taps; ++j) {
        float* row = cols.data() + static_cast<std::ptrdiff_t>(c * taps + j) * t;
        const int off = offsets_[j];
        for (int s = 0; s < t; ++s) {
          const int src = s + off;
          row[s] = (src >= 0 && src < t) ? xi[c * t + src] : 0.0f;
        }
      }
    }
    ConstMatMap dym(dy.data() + static_cast<std::ptrdiff_t>(i) * out_ch_ * t, out_ch_, t);
    dwm.noalias() += dym * cols.mat(crows, t).transpose();
    bias_.grad.vec() += dym.rowwise().sum();
    dcols.mat(crows, t).noalias() = wm.transpose() * dym;

    float* dxi = dx.data() + static_cast<std::ptrdiff_t>(i) * in_ch_ * t;
    for (int c = 0; c < in_ch_; ++c) {
      for (int j = 0; j < taps; ++j) {
        const float* row = dcols.data() + static_cast<std::ptrdiff_t>(c * taps + j) * t;
        const int off = offsets_[j];
        for (int s = 0; s < t; ++s) {
          const int src = s + off;
          if (src >= 0 && src < t) dxi[c * t + src] += row[s];
        }
      }
    }
  }
  return dx;
}

void Conv1d::params(ParamRefs& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

void Conv1d::state(StateRefs& out) {
  out.emplace_back(weight_.name, &weight_.value);
  out.emplace_back(bias_.name, &bias_.value);
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::string name, int channels, float eps, float momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_(name + ".gamma", Tensor({channels})),
      beta_(name + ".beta", Tensor({channels})),
      running_mean_({channels}),
      running_var_({channels}),
      name_(std::move(name)) {
  gamma_.value.fill(1.0f);
  running_var_.fill(1.0f);
}

Tensor BatchNorm::forward(const Tensor& x, bool train) {
  if (x.ndim() != 3 || x.dim(1) != channels_)
    throw ContractError("batchnorm input must be (N, C, L)");
  const int n = x.dim(0), l = x.dim(2);
  const std::int64_t m = static_cast<std::int64_t>(n) * l;
  Tensor y(x.shape());
  cached_train_ = train;

  if (train) {
    cached_xhat_ = Tensor(x.shape());
    batch_inv_std_.assign(channels_, 0.0f);
    for (int c = 0; c < channels_; ++c) {
      double sum = 0.0, sum_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const float* src = x.data() + (static_cast<std::ptrdiff_t>(i) * channels_ + c) * l;
        for (int s = 0; s < l; ++s) {
          sum += src[s];
          sum_sq += static_cast<double>(src[s]) * src[s];
        }
      }
      const float mean = static_cast<float>(sum / static_cast<double>(m));
      const float var =
          static_cast<float>(sum_sq / static_cast<double>(m)) - mean * mean;
      const float inv_std = 1.0f / std::sqrt(std::max(var, 0.0f) + eps_);
      batch_inv_std_[c] = inv_std;
      running_mean_[c] = (1.0f - momentum_) * running_mean_[c] + momentum_ * mean;
      running_var_[c] =
          (1.0f - momentum_) * running_var_[c] + momentum_ * std::max(var, 0.0f);
      const float g = gamma_.value[c], b = beta_.value[c];
      for (int i = 0; i < n; ++i) {
        const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(i) * channels_ + c) * l;
        for (int s = 0; s < l; ++s) {
          const float xh = (x.data()[base + s] - mean) * inv_std;
          cached_xhat_.data()[base + s] = xh;
          y.data()[base + s] = g * xh + b;
        }
      }
    }
  } else {
    for (int c = 0; c < channels_; ++c) {
      const float inv_std = 1.0f / std::sqrt(running_var_[c] + eps_);
      const float mean = running_mean_[c];
      const float g = gamma_.value[c], b = beta_.value[c];
      for (int i = 0; i < n; ++i) {
        const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(i) * channels_ + c) * l;
        for (int s = 0; s < l; ++s)
          y.data()[base + s] = g * (x.data()[base + s] - mean) * inv_std + b;
      }
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
  if (!cached_train_) throw ContractError("batchnorm backward requires train-mode forward");
  const int n = dy.dim(0), l = dy.dim(2);
  const std::int64_t m = static_cast<std::int64_t>(n) * l;
  Tensor dx(dy.shape());

  for (int c = 0; c < channels_; ++c) {
    const float g = gamma_.value[c];
    const float inv_std = batch_inv_std_[c];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(i) * channels_ + c) * l;
      for (int s = 0; s < l; ++s) {
        sum_dy += dy.data()[base + s];
        sum_dy_xhat += static_cast<double>(dy.data()[base + s]) * cached_xhat_.data()[base + s];
      }
    }
    gamma_.grad[c] += static_cast<float>(sum_dy_xhat);
    beta_.grad[c] += static_cast<float>(sum_dy);
    const float mean_dy = static_cast<float>(sum_dy / static_cast<double>(m));
    const float mean_dy_xhat = static_cast<float>(sum_dy_xhat / static_cast<double>(m));
    for (int i = 0; i < n; ++i) {
      const std::ptrdiff_t base = (static_cast<std::ptrdiff_t>(i) * channels_ + c) * l;
      for (int s = 0; s < l; ++s) {
        const float xh = cached_xhat_.data()[base + s];
        dx.data()[base + s] =
            g * inv_std * (dy.data()[base + s] - mean_dy - xh * mean_dy_xhat);
      }
    }
  }
  return dx;
}

void BatchNorm::params(ParamRefs& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

void BatchNorm::state(StateRefs& out) {
  out.emplace_back(gamma_.name, &gamma_.value);
  out.emplace_back(beta_.name, &beta_.value);
  out.emplace_back(name_ + ".running_mean", &running_mean_);
  out.emplace_back(name_ + ".running_var", &running_var_);
}

// ---------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(std::string name, int dim, float eps)
    : dim_(dim),
      eps_(eps),
      gamma_(name + ".gamma", Tensor({dim})),
      beta_(name + ".beta", Tensor({dim})) {
  gamma_.value.fill(1.0f);
}

Tensor LayerNorm::forward(const Tensor& x) {
  const int rows = static_cast<int>(x.size() / dim_);
  Tensor y(x.shape());
  cached_xhat_ = Tensor(x.shape());
  inv_std_.assign(static_cast<std::size_t>(rows), 0.0f);
  for (int r = 0; r < rows; ++r) {
    const float* xr = x.data() + static_cast<std::ptrdiff_t>(r) * dim_;
    double sum = 0.0, sum_sq = 0.0;
    for (int j = 0; j < dim_; ++j) {
      sum += xr[j];
      sum_sq += static_cast<double>(xr[j]) * xr[j];
    }
    const float mean = static_cast<float>(sum / dim_);
    const float var = static_cast<float>(sum_sq / dim_) - mean * mean;
    const float inv = 1.0f / std::sqrt(std::max(var, 0.0f) + eps_);
    inv_std_[static_cast<std::size_t>(r)] = inv;
    float* xh = cached_xhat_.data() + static_cast<std::ptrdiff_t>(r) * dim_;
    float* yr = y.data() + static_cast<std::ptrdiff_t>(r) * dim_;
    for (int j = 0; j < dim_; ++j) {
      xh[j] = (xr[j] - mean) * inv;
      yr[j] = gamma_.value[j] * xh[j] + beta_.value[j];
    }
  }
  return y;
}

Tensor LayerNorm::backward(const Tensor& dy) {
  const int rows = static_cast<int>(dy.size() / dim_);
  Tensor dx(dy.shape());
  for (int r = 0; r < rows; ++r) {
    const float* dyr = dy.data() + static_cast<std::ptrdiff_t>(r) * dim_;
    const float* xh = cached_xhat_.data() + static_cast<std::ptrdiff_t>(r) * dim_;
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double dxh = static_cast<double>(dyr[j]) * gamma_.value[j];
      sum_dxhat += dxh;
      sum_dxhat_xhat += dxh * xh[j];
      gamma_.grad[j] += dyr[j] * xh[j];
      beta_.grad[j] += dyr[j];
    }
    const float mean_dxhat = static_cast<float>(sum_dxhat / dim_);
    const float mean_dxhat_xhat = static_cast<float>(sum_dxhat_xhat / dim_);
    const float inv = inv_std_[static_cast<std::size_t>(r)];
    float* dxr = dx.data() + static_cast<std::ptrdiff_t>(r) * dim_;
    for (int j = 0; j < dim_; ++j) {
      const float dxh = dyr[j] * gamma_.value[j];
      dxr[j] = inv * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
    }
  }
  return dx;
}

void LayerNorm::params(ParamRefs& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

void LayerNorm::state(StateRefs& out) {
  out.emplace_back(gamma_.name, &gamma_.value);
  out.emplace_back(beta_.name, &beta_.value);
}

// ---------------------------------------------------------------- ReLU / Dropout

Tensor ReLU::forward(const Tensor& x) {
  cached_x_ = x;
  Tensor y = x;
  for (auto& v : y.raw()) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor ReLU::backward(const Tensor& dy) {
  Tensor dx = dy;
  const auto& xr = cached_x_.raw();
  auto& dr = dx.raw();
  for (std::size_t i = 0; i < dr.size(); ++i)
    if (xr[i] <= 0.0f) dr[i] = 0.0f;
  return dx;
}

Tensor Dropout::forward(const Tensor& x, bool train, Rng* rng) {
  if (!train || p_ <= 0.0f) {
    identity_ = true;
    return x;
  }
  if (rng == nullptr) throw ContractError("dropout in train mode needs an rng");
  identity_ = false;
  mask_ = Tensor(x.shape());
  const float scale = 1.0f / (1.0f - p_);
  Tensor y(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const float m = rng->bernoulli(static_cast<double>(p_)) ? 0.0f : scale;
    mask_[i] = m;
    y[i] = x[i] * m;
  }
  return y;
}

Tensor Dropout::backward(const Tensor& dy) {
  if (identity_) return dy;
  Tensor dx(dy.shape());
  for (std::int64_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask_[i];
  return dx;
}

// ---------------------------------------------------------------- softmax

void softmax_rows_inplace(MatMap m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const float mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

Tensor softmax_rows(const Tensor& x, int rows, int cols) {
  Tensor y = x;
  softmax_rows_inplace(y.mat(rows, cols));
  return y;
}

}  // namespace affect::nn
