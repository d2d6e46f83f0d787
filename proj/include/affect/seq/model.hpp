#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "affect/data/types.hpp"
#include "affect/nn/attention.hpp"
#include "affect/nn/layers.hpp"
#include "affect/schedule.hpp"
#include "affect/tensor.hpp"

namespace affect::seq {

inline constexpr int kWindowFrames = 30;
inline constexpr int kVisualDim = 512;
inline constexpr int kAudioDim = 512;
inline constexpr int kFusedDim = kVisualDim + kAudioDim;

// One window of fused per-frame features. Rows beyond the real frames are
// zero with mask false.
struct FeatureSequence {
  std::string video_id;
  int start_frame = 0;
  Tensor fused;                    // (L, kFusedDim)
  std::vector<std::uint8_t> mask;  // L entries, 1 = real frame

  int length() const { return fused.ndim() == 2 ? fused.dim(0) : 0; }
  int real_frames() const {
    int n = 0;
    for (const auto m : mask) n += m ? 1 : 0;
    return n;
  }
};

// Audio feature row for the frame at time frame_index / fps.
int audio_row_for_frame(int frame_index, double fps, double stride_sec, int t_rows);

// Picks one audio row per listed frame: round(t / stride), clamped to range.
Tensor align_audio_to_frames(const Tensor& audio_feats, double fps, double stride_sec,
                             const std::vector<int>& frame_indices);

// Non-overlapping [start, start+len) windows covering frame_count exactly
// once; the final window keeps its true (shorter) length.
std::vector<std::pair<int, int>> chunk_video(int frame_count, int window = kWindowFrames);

// Row-wise concatenation, visual first.
Tensor fuse(const Tensor& visual_seq, const Tensor& audio_seq);

struct FramePrediction {
  std::array<float, data::kNumAus> au_probs{};
  std::array<float, data::kNumExpressions> expr_probs{};
};

struct SequenceModelConfig {
  int d_model = kFusedDim;
  int heads = 8;
  int ff_dim = 2048;
  float dropout = 0.1f;
  int encoder_layers = 1;
  bool positional_encoding = true;
  int window = kWindowFrames;
};

// Transformer encoder over fused frame tokens with per-frame linear heads.
class SequenceModel {
 public:
  explicit SequenceModel(const SequenceModelConfig& cfg, std::uint64_t seed);

  // x: (B, L, d_model), mask: (B, L) -> (B, L, d_model)
  Tensor encode_batch(const Tensor& x, const Tensor& mask, bool train, Rng* rng);
  // Sequence-level convenience used at inference.
  Tensor encode(const FeatureSequence& seq);

  // encoded rows -> logits; heads apply to every token.
  Tensor au_logits(const Tensor& encoded);
  Tensor expr_logits(const Tensor& encoded);

  // Backward through the active head and the encoder stack; returns the
  // gradient with respect to the fused input (B, L, d_model).
  Tensor backward_task(const Tensor& dlogits, Task task);

  // Per-frame sigmoid/softmax probabilities for the real (mask=1) rows.
  std::vector<FramePrediction> predict_frames(const Tensor& encoded,
                                              const std::vector<std::uint8_t>& mask);
  std::vector<FramePrediction> predict_sequence(const FeatureSequence& seq);

  nn::ParamRefs params_for(Task task);
  nn::ParamRefs all_params();
  nn::StateRefs state();
  void state(nn::StateRefs& out);
  std::string state_hash() const;
  std::string head_hash(Task task) const;

  const SequenceModelConfig& config() const { return cfg_; }

 private:
  struct EncoderLayer {
    nn::MultiheadSelfAttention attn;
    nn::Dropout drop_attn;
    nn::LayerNorm ln1;
    nn::Linear ff1;
    nn::ReLU relu;
    nn::Linear ff2;
    nn::Dropout drop_ff;
    nn::LayerNorm ln2;

    EncoderLayer(const std::string& name, const SequenceModelConfig& cfg);
    Tensor forward(const Tensor& x, const Tensor& mask, bool train, Rng* rng);
    Tensor backward(const Tensor& dy);
    void init(Rng& rng);
    void params(nn::ParamRefs& out);
    void state(nn::StateRefs& out);
  };

  Tensor positional_table(int length) const;

  SequenceModelConfig cfg_;
  std::vector<EncoderLayer> layers_;
  nn::Linear au_out_;
  nn::Linear expr_out_;
  Task last_task_ = Task::expression;
  std::vector<int> last_batch_shape_;
};

}  // namespace affect::seq
