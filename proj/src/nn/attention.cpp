#include "affect/nn/attention.hpp"

#include <cmath>

#include "affect/errors.hpp"

namespace affect::nn {

MultiheadSelfAttention::MultiheadSelfAttention(std::string name, int d_model, int heads)
    : d_model_(d_model),
      heads_(heads),
      head_dim_(d_model / heads),
      wq_(name + ".wq", d_model, d_model),
      wk_(name + ".wk", d_model, d_model),
      wv_(name + ".wv", d_model, d_model),
      wo_(name + ".wo", d_model, d_model) {
  if (d_model % heads != 0) throw ContractError("d_model must divide into heads");
}

void MultiheadSelfAttention::init(Rng& rng) {
  // Xavier-style: attention projections feed linear maps, not ReLUs.
  const float s = std::sqrt(1.0f / static_cast<float>(d_model_));
  for (Linear* lin : {&wq_, &wk_, &wv_, &wo_}) {
    for (auto& v : lin->weight().value.raw()) v = rng.normal(0.0f, s);
    lin->bias().value.zero();
  }
}

Tensor MultiheadSelfAttention::forward(const Tensor& x, const Tensor& key_mask) {
  if (x.ndim() != 3 || x.dim(2) != d_model_)
    throw ContractError("attention input must be (B, T, d_model)");
  const int b = x.dim(0), t = x.dim(1);
  if (key_mask.ndim() != 2 || key_mask.dim(0) != b || key_mask.dim(1) != t)
    throw ContractError("key mask must be (B, T)");

  q_ = wq_.forward(x);
  k_ = wk_.forward(x);
  v_ = wv_.forward(x);
  mask_ = key_mask;

  attn_ = Tensor({b, heads_, t, t});
  concat_ = Tensor({b, t, d_model_});
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim_));

  Eigen::MatrixXf scores(t, t);
  for (int i = 0; i < b; ++i) {
    const std::ptrdiff_t seq = static_cast<std::ptrdiff_t>(i) * t * d_model_;
    ConstMatMap qm(q_.data() + seq, t, d_model_);
    ConstMatMap km(k_.data() + seq, t, d_model_);
    ConstMatMap vm(v_.data() + seq, t, d_model_);
    MatMap cm(concat_.data() + seq, t, d_model_);
    const float* mrow = key_mask.data() + static_cast<std::ptrdiff_t>(i) * t;
    for (int h = 0; h < heads_; ++h) {
      const int c0 = h * head_dim_;
      auto qh = qm.middleCols(c0, head_dim_);
      auto kh = km.middleCols(c0, head_dim_);
      auto vh = vm.middleCols(c0, head_dim_);
      scores.noalias() = qh * kh.transpose() * scale;
      for (int j = 0; j < t; ++j)
        if (mrow[j] == 0.0f) scores.col(j).setConstant(-1e30f);
      MatMap am(attn_.data() + ((static_cast<std::ptrdiff_t>(i) * heads_ + h) * t) * t, t, t);
      am = scores;
      softmax_rows_inplace(am);
      cm.middleCols(c0, head_dim_).noalias() = am * vh;
    }
  }
  return wo_.forward(concat_);
}

Tensor MultiheadSelfAttention::backward(const Tensor& dy) {
  const int b = dy.dim(0), t = dy.dim(1);
  Tensor dconcat = wo_.backward(dy);

  Tensor dq({b, t, d_model_});
  Tensor dk({b, t, d_model_});
  Tensor dv({b, t, d_model_});
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim_));

  Eigen::MatrixXf da(t, t), dscores(t, t);
  for (int i = 0; i < b; ++i) {
    const std::ptrdiff_t seq = static_cast<std::ptrdiff_t>(i) * t * d_model_;
    ConstMatMap qm(q_.data() + seq, t, d_model_);
    ConstMatMap km(k_.data() + seq, t, d_model_);
    ConstMatMap vm(v_.data() + seq, t, d_model_);
    ConstMatMap dcm(dconcat.data() + seq, t, d_model_);
    MatMap dqm(dq.data() + seq, t, d_model_);
    MatMap dkm(dk.data() + seq, t, d_model_);
    MatMap dvm(dv.data() + seq, t, d_model_);
    for (int h = 0; h < heads_; ++h) {
      const int c0 = h * head_dim_;
      ConstMatMap am(attn_.data() + ((static_cast<std::ptrdiff_t>(i) * heads_ + h) * t) * t, t, t);
      auto dch = dcm.middleCols(c0, head_dim_);
      da.noalias() = dch * vm.middleCols(c0, head_dim_).transpose();
      dvm.middleCols(c0, head_dim_).noalias() = am.transpose() * dch;
      // softmax backward per row; masked columns carry zero attention weight.
      for (int r = 0; r < t; ++r) {
        const float dot = da.row(r).cwiseProduct(am.row(r)).sum();
        dscores.row(r) = (da.row(r).array() - dot) * am.row(r).array();
      }
      dqm.middleCols(c0, head_dim_).noalias() = dscores * km.middleCols(c0, head_dim_) * scale;
      dkm.middleCols(c0, head_dim_).noalias() =
          dscores.transpose() * qm.middleCols(c0, head_dim_) * scale;
    }
  }

  Tensor dx = wq_.backward(dq);
  dx.vec() += wk_.backward(dk).vec();
  dx.vec() += wv_.backward(dv).vec();
  return dx;
}

void MultiheadSelfAttention::params(ParamRefs& out) {
  wq_.params(out);
  wk_.params(out);
  wv_.params(out);
  wo_.params(out);
}

void MultiheadSelfAttention::state(StateRefs& out) {
  wq_.state(out);
  wk_.state(out);
  wv_.state(out);
  wo_.state(out);
}

}  // namespace affect::nn
