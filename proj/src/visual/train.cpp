#include "affect/visual/train.hpp"

#include <algorithm>
#include <numeric>

#include "affect/data/media.hpp"
#include "affect/errors.hpp"

namespace affect::visual {

namespace {

// Cyclic shuffled index stream; reshuffles on wrap-around.
class IndexStream {
 public:
  IndexStream(std::size_t n, Rng& rng) : rng_(rng) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
  }

  std::vector<std::size_t> next_batch(std::size_t batch) {
    std::vector<std::size_t> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      if (pos_ == order_.size()) {
        reshuffle();
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  void reshuffle() { std::shuffle(order_.begin(), order_.end(), rng_.engine()); }

  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct StepResult {
  double loss;
  double grad_norm;
};

template <typename Sample, typename LossFn>
StepResult run_step(VisualModel& model, const std::vector<Sample>& samples,
                    const std::vector<std::size_t>& batch_idx, Task task,
                    const VisualTrainConfig& cfg, Rng& rng, nn::SgdMomentum& opt,
                    const LossFn& loss_fn) {
  const int b = static_cast<int>(batch_idx.size());
  std::vector<data::Image> images;
  images.reserve(batch_idx.size());
  for (const auto i : batch_idx) {
    images.push_back(cfg.augment_enabled ? augment(samples[i].image, rng, cfg.augment)
                                         : samples[i].image);
  }
  const Tensor inputs = data::images_to_tensor(images);

  auto params = model.params_for(task);
  nn::zero_grads(params);

  const Tensor emb = model.embed(inputs, /*train=*/true);
  const Tensor logits = model.task_logits(emb, task);
  const int dim = logits.dim(1);

  Tensor dlogits(logits.shape());
  double total_loss = 0.0;
  Eigen::VectorXd row(dim), grad(dim);
  for (int r = 0; r < b; ++r) {
    for (int j = 0; j < dim; ++j) row[j] = logits[static_cast<std::int64_t>(r) * dim + j];
    total_loss += loss_fn(batch_idx[static_cast<std::size_t>(r)], row, grad);
    for (int j = 0; j < dim; ++j)
      dlogits[static_cast<std::int64_t>(r) * dim + j] = static_cast<float>(grad[j] / b);
  }
  model.backward_task(dlogits, task);
  const double gnorm = opt.step(params);
  return {total_loss / b, gnorm};
}

}  // namespace

VisualTrainData load_visual_training_data(const data::DatasetSplit& au_split,
                                          const data::DatasetSplit& expr_split) {
  VisualTrainData out;
  for (const auto& ann : au_split.annotations) {
    if (!ann.au) continue;
    const auto& video = au_split.videos.at(ann.video_id);
    out.au.push_back(
        {data::load_image(video.frame_paths[static_cast<std::size_t>(ann.frame_index)]),
         *ann.au});
  }
  for (const auto& ann : expr_split.annotations) {
    if (!ann.expr) continue;
    const auto& video = expr_split.videos.at(ann.video_id);
    out.expr.push_back(
        {data::load_image(video.frame_paths[static_cast<std::size_t>(ann.frame_index)]),
         *ann.expr});
  }
  return out;
}

std::vector<TrainStep> train_multitask(VisualModel& model, const VisualTrainData& train_data,
                                       const AlternationSchedule& schedule,
                                       const VisualTrainConfig& cfg,
                                       const losses::BceParams& bce_params,
                                       const losses::FocalParams& focal_params,
                                       const StepCallback& on_step) {
  if (train_data.au.empty())
    throw ConfigError("AU task has zero labeled samples");
  if (train_data.expr.empty())
    throw ConfigError("expression task has zero labeled samples");
  if (cfg.batch_size <= 0 || cfg.epochs <= 0)
    throw ConfigError("batch size and epochs must be positive");
  bce_params.validate();
  focal_params.validate();

  Rng rng(cfg.seed);
  nn::SgdMomentum opt(cfg.sgd);
  IndexStream au_stream(train_data.au.size(), rng);
  IndexStream expr_stream(train_data.expr.size(), rng);

  const auto au_loss = [&](std::size_t idx, const Eigen::VectorXd& logits,
                           Eigen::VectorXd& grad) {
    Eigen::VectorXd targets(data::kNumAus);
    const auto& label = train_data.au[idx].label;
    for (int j = 0; j < data::kNumAus; ++j)
      targets[j] = static_cast<double>(label[static_cast<std::size_t>(j)]);
    return losses::weighted_bce_from_logits(logits, targets, bce_params, &grad);
  };
  const auto expr_loss = [&](std::size_t idx, const Eigen::VectorXd& logits,
                             Eigen::VectorXd& grad) {
    return losses::focal_loss_from_logits(logits, train_data.expr[idx].label,
                                          focal_params, &grad);
  };

  const auto batches_for = [&](std::size_t n) {
    return static_cast<int>((n + static_cast<std::size_t>(cfg.batch_size) - 1) /
                            static_cast<std::size_t>(cfg.batch_size));
  };

  std::vector<TrainStep> history;
  int step = 0;
  int global_batch = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    int steps_this_epoch;
    if (schedule.mode == AlternationSchedule::Mode::epoch_by_epoch) {
      const Task task = select_task(schedule, epoch, 0);
      steps_this_epoch = batches_for(task == Task::au ? train_data.au.size()
                                                      : train_data.expr.size());
    } else {
      steps_this_epoch =
          batches_for(train_data.au.size()) + batches_for(train_data.expr.size());
    }
    for (int s = 0; s < steps_this_epoch; ++s) {
      const Task task = select_task(schedule, epoch, global_batch);
      StepResult result{};
      if (task == Task::au) {
        result = run_step(model, train_data.au, au_stream.next_batch(bs), task, cfg, rng,
                          opt, au_loss);
      } else {
        result = run_step(model, train_data.expr, expr_stream.next_batch(bs), task, cfg,
                          rng, opt, expr_loss);
      }
      TrainStep record{step, epoch, task, result.loss, result.grad_norm};
      history.push_back(record);
      if (on_step) on_step(record, model);
      ++step;
      ++global_batch;
    }
  }
  return history;
}

std::vector<TrainStep> train_multitask(VisualModel& model, const data::DatasetSplit& au_data,
                                       const data::DatasetSplit& expr_data,
                                       const AlternationSchedule& schedule,
                                       const VisualTrainConfig& cfg,
                                       const losses::BceParams& bce_params,
                                       const losses::FocalParams& focal_params,
                                       const StepCallback& on_step) {
  const VisualTrainData train_data = load_visual_training_data(au_data, expr_data);
  return train_multitask(model, train_data, schedule, cfg, bce_params, focal_params, on_step);
}

}  // namespace affect::visual
