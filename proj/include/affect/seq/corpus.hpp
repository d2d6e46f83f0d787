#pragma once

#include <optional>
#include <string>
#include <vector>

#include "affect/audio/mel.hpp"
#include "affect/audio/tdnn.hpp"
#include "affect/data/media.hpp"
#include "affect/data/types.hpp"
#include "affect/seq/model.hpp"
#include "affect/visual/model.hpp"

namespace affect::seq {

// One video prepared for sequence training / inference: every frame image,
// the full-video mel spectrogram, and per-frame labels (absent where the
// split carries none).
struct SequenceVideo {
  std::string video_id;
  double fps = 30.0;
  int frame_count = 0;
  std::vector<data::Image> frames;
  Tensor visual_feats;  // (F, 512), filled by compute_visual_features
  audio::MelSpectrogram mel;
  bool has_audio = false;
  std::vector<std::optional<data::AuVector>> au;
  std::vector<std::optional<int>> expr;
};

struct SequenceCorpus {
  std::vector<SequenceVideo> videos;
  audio::MelConfig mel_cfg;
};

// Loads frames and audio for every video of the split that has at least one
// annotation. Frames missing on disk become zero images (their annotations
// were already pruned). Audio is resampled to 16 kHz before the spectrogram.
SequenceCorpus build_sequence_corpus(const data::DatasetSplit& split,
                                     const audio::MelConfig& mel_cfg = {});

// (F, embed_dim) eval-mode embeddings, batched internally.
Tensor compute_visual_features(visual::VisualModel& model,
                               const std::vector<data::Image>& frames,
                               int batch_size = 64);

void fill_visual_features(visual::VisualModel& model, SequenceCorpus& corpus,
                          int batch_size = 64);

struct VideoPredictions {
  std::string video_id;
  std::vector<int> frame_indices;
  std::vector<FramePrediction> predictions;
};

// Full inference for one video: chunk into non-overlapping windows, align
// audio features (TDNN silence features when the video has no track), fuse,
// encode, predict every frame exactly once.
VideoPredictions predict_video(const SequenceVideo& video, audio::TdnnModel& tdnn,
                               SequenceModel& model);

}  // namespace affect::seq
