#include "affect/visual/backbone.hpp"

#include "affect/errors.hpp"

namespace affect::visual {

void check_image_batch(const Tensor& images) {
  if (images.ndim() != 4 || images.dim(1) != 3 || images.dim(2) != kInputSize ||
      images.dim(3) != kInputSize)
    throw ContractError("image batch must be (N, 3, 112, 112)");
}

// ---------------------------------------------------------------- SmallResNet

SmallResNet::ResidualBlock::ResidualBlock(const std::string& name, int ch)
    : conv1(name + ".conv1", ch, ch, 3, 1, 1),
      conv2(name + ".conv2", ch, ch, 3, 1, 1),
      norm1(name + ".norm1", ch),
      norm2(name + ".norm2", ch) {}

Tensor SmallResNet::ResidualBlock::forward(const Tensor& x, bool train) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor y = conv1.forward(x);
  y = norm1.forward(y.reshaped({n, c, h * w}), train).reshaped({n, c, h, w});
  y = relu1.forward(y);
  y = conv2.forward(y);
  y = norm2.forward(y.reshaped({n, c, h * w}), train).reshaped({n, c, h, w});
  y.vec() += x.vec();  // identity skip
  return relu2.forward(y);
}

Tensor SmallResNet::ResidualBlock::backward(const Tensor& dy) {
  const auto shape = dy.shape();
  const int n = shape[0], c = shape[1], h = shape[2], w = shape[3];
  Tensor ds = relu2.backward(dy);
  Tensor dx = norm2.backward(ds.reshaped({n, c, h * w})).reshaped({n, c, h, w});
  dx = conv2.backward(dx);
  dx = relu1.backward(dx);
  dx = norm1.backward(dx.reshaped({n, c, h * w})).reshaped({n, c, h, w});
  dx = conv1.backward(dx);
  dx.vec() += ds.vec();  // skip path
  return dx;
}

void SmallResNet::ResidualBlock::params(nn::ParamRefs& out) {
  conv1.params(out);
  norm1.params(out);
  conv2.params(out);
  norm2.params(out);
}

void SmallResNet::ResidualBlock::state(nn::StateRefs& out) {
  conv1.state(out);
  norm1.state(out);
  conv2.state(out);
  norm2.state(out);
}

void SmallResNet::ResidualBlock::init(Rng& rng) {
  conv1.init(rng);
  conv2.init(rng);
}

SmallResNet::SmallResNet(std::vector<int> stage_channels, int embed_dim)
    : channels_(std::move(stage_channels)),
      embed_dim_(embed_dim),
      proj_("backbone.proj", channels_.empty() ? 0 : channels_.back(), embed_dim) {
  if (channels_.size() != 4) throw ContractError("backbone expects 4 stage widths");
  int in = 3;
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const std::string name = "backbone.stage" + std::to_string(i);
    stages_.push_back(Stage{nn::Conv2d(name + ".down", in, channels_[i], 3, 2, 1),
                            nn::BatchNorm(name + ".norm", channels_[i]), nn::ReLU{},
                            ResidualBlock(name + ".block", channels_[i])});
    in = channels_[i];
  }
}

void SmallResNet::init(Rng& rng) {
  for (auto& s : stages_) {
    s.down.init(rng);
    s.block.init(rng);
  }
  proj_.init(rng);
}

Tensor SmallResNet::forward(const Tensor& images, bool train) {
  check_image_batch(images);
  const int n = images.dim(0);
  Tensor h = images;
  for (auto& s : stages_) {
    h = s.down.forward(h);
    const auto sh = h.shape();
    h = s.norm.forward(h.reshaped({sh[0], sh[1], sh[2] * sh[3]}), train)
            .reshaped(sh);
    h = s.relu.forward(h);
    h = s.block.forward(h, train);
  }
  pooled_h_ = h.dim(2);
  pooled_w_ = h.dim(3);
  const int c = h.dim(1);
  // global average pool
  Tensor pooled({n, c});
  const float inv = 1.0f / static_cast<float>(pooled_h_ * pooled_w_);
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const float* src = h.data() + (static_cast<std::ptrdiff_t>(i) * c + ch) *
                                        pooled_h_ * pooled_w_;
      float acc = 0.0f;
      for (int k = 0; k < pooled_h_ * pooled_w_; ++k) acc += src[k];
      pooled[static_cast<std::int64_t>(i) * c + ch] = acc * inv;
    }
  return proj_.forward(pooled);
}

Tensor SmallResNet::backward(const Tensor& dembed) {
  Tensor dpooled = proj_.backward(dembed);
  const int n = dpooled.dim(0), c = dpooled.dim(1);
  Tensor dh({n, c, pooled_h_, pooled_w_});
  const float inv = 1.0f / static_cast<float>(pooled_h_ * pooled_w_);
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const float g = dpooled[static_cast<std::int64_t>(i) * c + ch] * inv;
      float* dst = dh.data() +
                   (static_cast<std::ptrdiff_t>(i) * c + ch) * pooled_h_ * pooled_w_;
      for (int k = 0; k < pooled_h_ * pooled_w_; ++k) dst[k] = g;
    }
  Tensor g = dh;
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
    g = it->block.backward(g);
    g = it->relu.backward(g);
    const auto sh = g.shape();
    g = it->norm.backward(g.reshaped({sh[0], sh[1], sh[2] * sh[3]})).reshaped(sh);
    g = it->down.backward(g);
  }
  return g;
}

void SmallResNet::params(nn::ParamRefs& out) {
  for (auto& s : stages_) {
    s.down.params(out);
    s.norm.params(out);
    s.block.params(out);
  }
  proj_.params(out);
}

void SmallResNet::state(nn::StateRefs& out) {
  for (auto& s : stages_) {
    s.down.state(out);
    s.norm.state(out);
    s.block.state(out);
  }
  proj_.state(out);
}

// ---------------------------------------------------------------- TinyLinearBackbone

TinyLinearBackbone::TinyLinearBackbone(int embed_dim, int grid)
    : embed_dim_(embed_dim),
      grid_(grid),
      proj_("backbone.proj", 3 * grid * grid, embed_dim) {}

void TinyLinearBackbone::init(Rng& rng) { proj_.init(rng); }

Tensor TinyLinearBackbone::forward(const Tensor& images, bool train) {
  (void)train;
  check_image_batch(images);
  const int n = images.dim(0);
  const int cell = kInputSize / grid_;
  Tensor pooled({n, 3 * grid_ * grid_});
  const float inv = 1.0f / static_cast<float>(cell * cell);
  cached_n_ = n;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float* src = images.data() +
                         (static_cast<std::ptrdiff_t>(i) * 3 + c) * kInputSize * kInputSize;
      for (int gy = 0; gy < grid_; ++gy)
        for (int gx = 0; gx < grid_; ++gx) {
          float acc = 0.0f;
          for (int y = gy * cell; y < (gy + 1) * cell; ++y)
            for (int x = gx * cell; x < (gx + 1) * cell; ++x)
              acc += src[y * kInputSize + x];
          pooled[(static_cast<std::int64_t>(i) * 3 + c) * grid_ * grid_ + gy * grid_ + gx] =
              acc * inv;
        }
    }
  }
  return proj_.forward(pooled);
}

Tensor TinyLinearBackbone::backward(const Tensor& dembed) {
  Tensor dpooled = proj_.backward(dembed);
  // Gradient w.r.t. pixels is unused upstream (images are leaves); return a
  // zero tensor of the right batch shape.
  (void)dpooled;
  return Tensor({cached_n_, 3, kInputSize, kInputSize});
}

void TinyLinearBackbone::params(nn::ParamRefs& out) { proj_.params(out); }
void TinyLinearBackbone::state(nn::StateRefs& out) { proj_.state(out); }

std::unique_ptr<FrameBackbone> make_backbone(const std::string& kind,
                                             const std::vector<int>& channels,
                                             int embed_dim) {
  if (kind == "small_resnet") return std::make_unique<SmallResNet>(channels, embed_dim);
  if (kind == "tiny_linear") return std::make_unique<TinyLinearBackbone>(embed_dim);
  throw CheckpointError("unknown backbone kind: " + kind);
}

}  // namespace affect::visual
