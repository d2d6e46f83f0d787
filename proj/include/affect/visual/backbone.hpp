#pragma once

#include <memory>
#include <string>
#include <vector>

#include "affect/nn/layers.hpp"
#include "affect/nn/module.hpp"
#include "affect/tensor.hpp"

namespace affect::visual {

inline constexpr int kInputSize = 112;
inline constexpr int kEmbedDim = 512;

// Frame encoder contract: (N, 3, 112, 112) images in [0, 1] to (N, D)
// embeddings. Heads and trainers depend only on this interface, so backbones
// are swappable (and may be loaded with externally supplied weights).
class FrameBackbone {
 public:
  virtual ~FrameBackbone() = default;

  virtual std::string kind() const = 0;
  virtual int embed_dim() const = 0;
  virtual Tensor forward(const Tensor& images, bool train) = 0;
  virtual Tensor backward(const Tensor& dembed) = 0;
  virtual void params(nn::ParamRefs& out) = 0;
  virtual void state(nn::StateRefs& out) = 0;
};

// Residual CNN: four stride-2 stages (112 -> 56 -> 28 -> 14 -> 7), each a
// downsampling conv plus one residual block, then global average pooling and
// a linear projection to the embedding width.
class SmallResNet final : public FrameBackbone {
 public:
  explicit SmallResNet(std::vector<int> stage_channels = {16, 32, 64, 128},
                       int embed_dim = kEmbedDim);

  void init(Rng& rng);

  std::string kind() const override { return "small_resnet"; }
  int embed_dim() const override { return embed_dim_; }
  Tensor forward(const Tensor& images, bool train) override;
  Tensor backward(const Tensor& dembed) override;
  void params(nn::ParamRefs& out) override;
  void state(nn::StateRefs& out) override;

  const std::vector<int>& stage_channels() const { return channels_; }

 private:
  struct ResidualBlock {
    nn::Conv2d conv1, conv2;
    nn::BatchNorm norm1, norm2;
    nn::ReLU relu1, relu2;

    ResidualBlock(const std::string& name, int ch);
    Tensor forward(const Tensor& x, bool train);
    Tensor backward(const Tensor& dy);
    void params(nn::ParamRefs& out);
    void state(nn::StateRefs& out);
    void init(Rng& rng);
  };

  struct Stage {
    nn::Conv2d down;
    nn::BatchNorm norm;
    nn::ReLU relu;
    ResidualBlock block;
  };

  std::vector<int> channels_;
  int embed_dim_;
  std::vector<Stage> stages_;
  nn::Linear proj_;
  int pooled_h_ = 0, pooled_w_ = 0;  // spatial extent entering the pool
};

// Mean-pool to a coarse grid, flatten, single linear map. A deliberately
// minimal conforming backbone for fast tests and interface checks.
class TinyLinearBackbone final : public FrameBackbone {
 public:
  explicit TinyLinearBackbone(int embed_dim = kEmbedDim, int grid = 8);

  void init(Rng& rng);

  std::string kind() const override { return "tiny_linear"; }
  int embed_dim() const override { return embed_dim_; }
  Tensor forward(const Tensor& images, bool train) override;
  Tensor backward(const Tensor& dembed) override;
  void params(nn::ParamRefs& out) override;
  void state(nn::StateRefs& out) override;

 private:
  int embed_dim_, grid_;
  nn::Linear proj_;
  int cached_n_ = 0;
};

void check_image_batch(const Tensor& images);

std::unique_ptr<FrameBackbone> make_backbone(const std::string& kind,
                                             const std::vector<int>& channels,
                                             int embed_dim);

}  // namespace affect::visual
