#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "affect/audio/mel.hpp"
#include "affect/nn/layers.hpp"
#include "affect/nn/module.hpp"
#include "affect/tensor.hpp"

namespace affect::audio {

struct TdnnConfig {
  int in_dim = 64;    // mel bands
  int hidden = 512;
  int out_dim = 512;  // per-step feature width
};

// Frame-level dilated temporal convolution stack. Each layer pads
// symmetrically so the sequence length is preserved; stacked tap offsets
// {-1,0,1}, {-2,0,2}, {-3,0,3}, {0}, {0} give a receptive radius of 6 steps.
class TdnnModel {
 public:
  explicit TdnnModel(const TdnnConfig& cfg = {});

  void init(Rng& rng);

  // x: (N, in_dim, T) -> (N, out_dim, T)
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  // Convenience inference view: one spectrogram in, (T, out_dim) out.
  Tensor features(const MelSpectrogram& spec);

  // TDNN output for a synthetic silent spectrogram of length t_frames; used
  // when a video carries no audio track so fusion width stays uniform.
  Tensor silence_features(int t_frames, const MelConfig& mel_cfg = {});

  int receptive_radius() const { return 6; }
  int out_dim() const { return cfg_.out_dim; }
  const TdnnConfig& config() const { return cfg_; }

  void params(nn::ParamRefs& out);
  void state(nn::StateRefs& out);
  std::string state_hash() const;

 private:
  TdnnConfig cfg_;
  struct Block {
    nn::Conv1d conv;
    nn::BatchNorm norm;
    nn::ReLU relu;
  };
  std::vector<Block> blocks_;
};

}  // namespace affect::audio
