#include "affect/seq/train.hpp"

#include <cmath>

#include "affect/errors.hpp"
#include "affect/losses.hpp"

namespace affect::seq {

namespace {

struct WindowPlan {
  int video = 0;
  int start = 0;
  int real_len = 0;
  int seg_lo = 0;               // mel column where the segment begins (may be < 0)
  std::vector<int> rows_rel;    // per real frame, audio column within the segment
};

// Picks a window with at least one frame labeled for the task.
bool window_has_label(const SequenceVideo& video, int start, int len, Task task) {
  for (int i = start; i < start + len; ++i) {
    if (task == Task::au && video.au[static_cast<std::size_t>(i)]) return true;
    if (task == Task::expression && video.expr[static_cast<std::size_t>(i)]) return true;
  }
  return false;
}

}  // namespace

std::vector<SeqTrainStep> train_sequence(SequenceCorpus& corpus,
                                         visual::VisualModel& frozen_visual,
                                         audio::TdnnModel& tdnn, SequenceModel& model,
                                         const AlternationSchedule& schedule,
                                         const SequenceTrainConfig& cfg,
                                         const losses::BceParams& bce_params,
                                         const losses::FocalParams& focal_params,
                                         const SeqStepCallback& on_step) {
  if (!frozen_visual.frozen())
    throw ContractError("train_sequence requires a frozen visual model");
  if (corpus.videos.empty()) throw ConfigError("sequence corpus is empty");
  if (cfg.batch_windows <= 0 || cfg.steps <= 0)
    throw ConfigError("sequence train steps and batch must be positive");
  bce_params.validate();
  focal_params.validate();

  fill_visual_features(frozen_visual, corpus);

  const int window = model.config().window;
  const int margin = tdnn.receptive_radius();
  const double stride = corpus.mel_cfg.stride_sec;
  const int n_mels = corpus.mel_cfg.n_mels;
  const float silent_value = static_cast<float>(std::log(corpus.mel_cfg.log_eps));

  // Videos eligible per task (at least one labeled frame).
  std::vector<int> au_videos, expr_videos;
  for (std::size_t v = 0; v < corpus.videos.size(); ++v) {
    const auto& video = corpus.videos[v];
    if (window_has_label(video, 0, video.frame_count, Task::au))
      au_videos.push_back(static_cast<int>(v));
    if (window_has_label(video, 0, video.frame_count, Task::expression))
      expr_videos.push_back(static_cast<int>(v));
  }
  if (au_videos.empty()) throw ConfigError("no AU-labeled frames for sequence training");
  if (expr_videos.empty())
    throw ConfigError("no expression-labeled frames for sequence training");

  Rng rng(cfg.seed);
  nn::SgdMomentum opt(cfg.sgd);
  std::vector<SeqTrainStep> history;
  history.reserve(static_cast<std::size_t>(cfg.steps));

  for (int step = 0; step < cfg.steps; ++step) {
    // Batch-level alternation regardless of the schedule's epoch/batch mode.
    const Task task = select_task(
        {AlternationSchedule::Mode::batch_by_batch, schedule.first_task}, 1, step);
    const auto& eligible = task == Task::au ? au_videos : expr_videos;

    // ---- sample windows
    std::vector<WindowPlan> plans;
    plans.reserve(static_cast<std::size_t>(cfg.batch_windows));
    int attempts = 0;
    while (static_cast<int>(plans.size()) < cfg.batch_windows) {
      if (++attempts > 50 * cfg.batch_windows)
        throw DataError("could not sample labeled windows for task");
      const int v = eligible[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(eligible.size()) - 1))];
      const auto& video = corpus.videos[static_cast<std::size_t>(v)];
      const int span = std::max(0, video.frame_count - window);
      const int start = span == 0 ? 0 : rng.uniform_int(0, span);
      const int len = std::min(window, video.frame_count - start);
      if (!window_has_label(video, start, len, task)) continue;
      WindowPlan plan;
      plan.video = v;
      plan.start = start;
      plan.real_len = len;
      plans.push_back(std::move(plan));
    }

    // ---- audio segment planning (uniform length across the batch)
    int seg_len = 2 * margin + 1;
    for (auto& plan : plans) {
      const auto& video = corpus.videos[static_cast<std::size_t>(plan.video)];
      const int t_mel = video.has_audio ? video.mel.num_frames() : 0;
      plan.rows_rel.resize(static_cast<std::size_t>(plan.real_len));
      int lo = 0, hi = 1;
      for (int i = 0; i < plan.real_len; ++i) {
        int row;
        if (t_mel > 0) {
          row = audio_row_for_frame(plan.start + i, video.fps, stride, t_mel);
        } else {
          row = static_cast<int>(std::llround(((plan.start + i) / video.fps) / stride));
        }
        plan.rows_rel[static_cast<std::size_t>(i)] = row;
        lo = i == 0 ? row : std::min(lo, row);
        hi = std::max(hi, row + 1);
      }
      plan.seg_lo = lo - margin;
      for (auto& r : plan.rows_rel) r -= plan.seg_lo;
      seg_len = std::max(seg_len, hi + margin - plan.seg_lo);
    }

    const int b = cfg.batch_windows;
    Tensor segments({b, n_mels, seg_len});
    segments.fill(silent_value);
    for (int w = 0; w < b; ++w) {
      const auto& plan = plans[static_cast<std::size_t>(w)];
      const auto& video = corpus.videos[static_cast<std::size_t>(plan.video)];
      if (!video.has_audio) continue;
      const int t_mel = video.mel.num_frames();
      for (int c = 0; c < seg_len; ++c) {
        const int col = plan.seg_lo + c;
        if (col < 0 || col >= t_mel) continue;
        for (int m = 0; m < n_mels; ++m)
          segments[(static_cast<std::int64_t>(w) * n_mels + m) * seg_len + c] =
              video.mel.values[static_cast<std::int64_t>(m) * t_mel + col];
      }
    }

    // ---- forward
    const Tensor audio_out = tdnn.forward(segments, /*train=*/true);  // (B, Da, seg)
    const int d_audio = audio_out.dim(1);
    const int d_visual = frozen_visual.config().embed_dim;
    const int d_model = model.config().d_model;

    Tensor fused({b, window, d_model});
    Tensor mask({b, window});
    for (int w = 0; w < b; ++w) {
      const auto& plan = plans[static_cast<std::size_t>(w)];
      const auto& video = corpus.videos[static_cast<std::size_t>(plan.video)];
      for (int i = 0; i < plan.real_len; ++i) {
        float* dst =
            fused.data() + (static_cast<std::int64_t>(w) * window + i) * d_model;
        std::copy_n(video.visual_feats.data() +
                        static_cast<std::ptrdiff_t>(plan.start + i) * d_visual,
                    d_visual, dst);
        const int col = plan.rows_rel[static_cast<std::size_t>(i)];
        for (int c = 0; c < d_audio; ++c)
          dst[d_visual + c] =
              audio_out[(static_cast<std::int64_t>(w) * d_audio + c) * seg_len + col];
        mask[static_cast<std::int64_t>(w) * window + i] = 1.0f;
      }
    }

    const Tensor encoded = model.encode_batch(fused, mask, /*train=*/true, &rng);
    const Tensor logits =
        task == Task::au ? model.au_logits(encoded) : model.expr_logits(encoded);
    const int dim = logits.dim(2);

    // ---- loss over labeled real frames
    Tensor dlogits(logits.shape());
    double total_loss = 0.0;
    int labeled = 0;
    Eigen::VectorXd row(dim), grad(dim);
    std::vector<std::pair<std::int64_t, Eigen::VectorXd>> grads;
    for (int w = 0; w < b; ++w) {
      const auto& plan = plans[static_cast<std::size_t>(w)];
      const auto& video = corpus.videos[static_cast<std::size_t>(plan.video)];
      for (int i = 0; i < plan.real_len; ++i) {
        const int frame = plan.start + i;
        const std::int64_t base = (static_cast<std::int64_t>(w) * window + i) * dim;
        if (task == Task::au) {
          const auto& label = video.au[static_cast<std::size_t>(frame)];
          if (!label) continue;
          for (int j = 0; j < dim; ++j) row[j] = logits[base + j];
          Eigen::VectorXd targets(dim);
          for (int j = 0; j < dim; ++j)
            targets[j] = static_cast<double>((*label)[static_cast<std::size_t>(j)]);
          total_loss += losses::weighted_bce_from_logits(row, targets, bce_params, &grad);
          grads.emplace_back(base, grad);
        } else {
          const auto& label = video.expr[static_cast<std::size_t>(frame)];
          if (!label) continue;
          for (int j = 0; j < dim; ++j) row[j] = logits[base + j];
          total_loss += losses::focal_loss_from_logits(row, *label, focal_params, &grad);
          grads.emplace_back(base, grad);
        }
        ++labeled;
      }
    }
    if (labeled == 0) throw DataError("sampled batch has no labeled frames");
    for (const auto& [base, g] : grads)
      for (int j = 0; j < dim; ++j)
        dlogits[base + j] = static_cast<float>(g[j] / labeled);

    // ---- backward + update
    nn::ParamRefs params;
    tdnn.params(params);
    for (auto* p : model.params_for(task)) params.push_back(p);
    nn::zero_grads(params);

    const Tensor dfused = model.backward_task(dlogits, task);
    Tensor dsegments({b, d_audio, seg_len});
    for (int w = 0; w < b; ++w) {
      const auto& plan = plans[static_cast<std::size_t>(w)];
      for (int i = 0; i < plan.real_len; ++i) {
        const float* src =
            dfused.data() + (static_cast<std::int64_t>(w) * window + i) * d_model;
        const int col = plan.rows_rel[static_cast<std::size_t>(i)];
        for (int c = 0; c < d_audio; ++c)
          dsegments[(static_cast<std::int64_t>(w) * d_audio + c) * seg_len + col] +=
              src[d_visual + c];
      }
    }
    tdnn.backward(dsegments);

    const double gnorm = opt.step(params);
    SeqTrainStep record{step, task, total_loss / labeled, gnorm};
    history.push_back(record);
    if (on_step) on_step(record, tdnn, model);
  }
  return history;
}

}  // namespace affect::seq
