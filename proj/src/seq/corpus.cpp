#include "affect/seq/corpus.hpp"

#include <cmath>
#include <filesystem>

#include "affect/errors.hpp"

namespace affect::seq {

namespace fs = std::filesystem;

SequenceCorpus build_sequence_corpus(const data::DatasetSplit& split,
                                     const audio::MelConfig& mel_cfg) {
  SequenceCorpus corpus;
  corpus.mel_cfg = mel_cfg;

  for (const auto& [vid, rec] : split.videos) {
    SequenceVideo video;
    video.video_id = vid;
    video.fps = rec.fps;
    video.frame_count = rec.frame_count();
    video.frames.reserve(static_cast<std::size_t>(video.frame_count));
    for (const auto& path : rec.frame_paths) {
      if (fs::exists(path))
        video.frames.push_back(data::load_image(path));
      else
        video.frames.push_back(data::Image::blank(visual::kInputSize, visual::kInputSize));
    }
    video.au.assign(static_cast<std::size_t>(video.frame_count), std::nullopt);
    video.expr.assign(static_cast<std::size_t>(video.frame_count), std::nullopt);

    if (rec.has_audio()) {
      const data::AudioTrack track = data::load_video_audio(rec, data::kAudioRate);
      video.mel = audio::compute_mel_spectrogram(track.samples, track.sample_rate, mel_cfg);
      video.has_audio = true;
    }
    corpus.videos.push_back(std::move(video));
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.videos.size(); ++i)
    index[corpus.videos[i].video_id] = i;
  for (const auto& ann : split.annotations) {
    auto& video = corpus.videos[index.at(ann.video_id)];
    if (ann.frame_index >= video.frame_count) continue;
    video.au[static_cast<std::size_t>(ann.frame_index)] = ann.au;
    video.expr[static_cast<std::size_t>(ann.frame_index)] = ann.expr;
  }
  return corpus;
}

Tensor compute_visual_features(visual::VisualModel& model,
                               const std::vector<data::Image>& frames, int batch_size) {
  const int f = static_cast<int>(frames.size());
  const int d = model.config().embed_dim;
  Tensor feats({f, d});
  for (int start = 0; start < f; start += batch_size) {
    const int n = std::min(batch_size, f - start);
    std::vector<data::Image> batch(frames.begin() + start, frames.begin() + start + n);
    const Tensor emb = model.embed(data::images_to_tensor(batch), /*train=*/false);
    std::copy_n(emb.data(), static_cast<std::ptrdiff_t>(n) * d,
                feats.data() + static_cast<std::ptrdiff_t>(start) * d);
  }
  return feats;
}

void fill_visual_features(visual::VisualModel& model, SequenceCorpus& corpus,
                          int batch_size) {
  for (auto& video : corpus.videos)
    video.visual_feats = compute_visual_features(model, video.frames, batch_size);
}

VideoPredictions predict_video(const SequenceVideo& video, audio::TdnnModel& tdnn,
                               SequenceModel& model) {
  const int window = model.config().window;
  const double stride = video.mel.stride_sec > 0 ? video.mel.stride_sec : 0.005;
  const int d_visual = video.visual_feats.dim(1);

  Tensor audio_feats;
  if (video.has_audio && video.mel.num_frames() > 0) {
    audio_feats = tdnn.features(video.mel);
  } else {
    // silent stand-in long enough to cover the last frame's timestamp
    const int t_needed =
        video.frame_count == 0
            ? 0
            : static_cast<int>(std::llround(((video.frame_count - 1) / video.fps) / stride)) + 1;
    audio_feats = tdnn.silence_features(t_needed);
  }

  VideoPredictions out;
  out.video_id = video.video_id;
  for (const auto& [start, len] : chunk_video(video.frame_count, window)) {
    std::vector<int> frame_indices(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) frame_indices[static_cast<std::size_t>(i)] = start + i;

    Tensor visual_rows({window, d_visual});
    for (int i = 0; i < len; ++i)
      std::copy_n(video.visual_feats.data() + static_cast<std::ptrdiff_t>(start + i) * d_visual,
                  d_visual, visual_rows.data() + static_cast<std::ptrdiff_t>(i) * d_visual);

    const Tensor aligned =
        align_audio_to_frames(audio_feats, video.fps, stride, frame_indices);
    Tensor audio_rows({window, audio_feats.dim(1)});
    std::copy_n(aligned.data(), aligned.size(), audio_rows.data());

    FeatureSequence seq;
    seq.video_id = video.video_id;
    seq.start_frame = start;
    seq.fused = fuse(visual_rows, audio_rows);
    seq.mask.assign(static_cast<std::size_t>(window), 0);
    for (int i = 0; i < len; ++i) seq.mask[static_cast<std::size_t>(i)] = 1;

    const auto preds = model.predict_sequence(seq);
    for (int i = 0; i < len; ++i) {
      out.frame_indices.push_back(start + i);
      out.predictions.push_back(preds[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

}  // namespace affect::seq
