#pragma once

#include <functional>
#include <vector>

#include "affect/data/types.hpp"
#include "affect/losses.hpp"
#include "affect/nn/optim.hpp"
#include "affect/schedule.hpp"
#include "affect/visual/augment.hpp"
#include "affect/visual/model.hpp"

namespace affect::visual {

struct AuSample {
  data::Image image;
  data::AuVector label;
};

struct ExprSample {
  data::Image image;
  int label = 0;
};

struct VisualTrainData {
  std::vector<AuSample> au;
  std::vector<ExprSample> expr;
};

// Loads every AU-labeled frame of au_split and every expression-labeled
// frame of expr_split into memory.
VisualTrainData load_visual_training_data(const data::DatasetSplit& au_split,
                                          const data::DatasetSplit& expr_split);

struct VisualTrainConfig {
  nn::SgdConfig sgd{0.001f, 0.9f, 5.0f};
  int batch_size = 64;
  int epochs = 8;
  AugmentConfig augment{};
  bool augment_enabled = true;
  std::uint64_t seed = 1;
};

struct TrainStep {
  int step = 0;   // 0-based global step
  int epoch = 0;  // 1-based
  Task task = Task::expression;
  double loss = 0.0;
  double grad_norm = 0.0;
};

using StepCallback = std::function<void(const TrainStep&, VisualModel&)>;

// Alternating two-task training: each step forwards the active task's batch,
// backpropagates its loss, and updates only the backbone plus the active
// head. History records one entry per optimizer step.
std::vector<TrainStep> train_multitask(VisualModel& model, const VisualTrainData& train_data,
                                       const AlternationSchedule& schedule,
                                       const VisualTrainConfig& cfg,
                                       const losses::BceParams& bce_params,
                                       const losses::FocalParams& focal_params,
                                       const StepCallback& on_step = nullptr);

// Convenience overload that loads images from the splits first.
std::vector<TrainStep> train_multitask(VisualModel& model, const data::DatasetSplit& au_data,
                                       const data::DatasetSplit& expr_data,
                                       const AlternationSchedule& schedule,
                                       const VisualTrainConfig& cfg,
                                       const losses::BceParams& bce_params,
                                       const losses::FocalParams& focal_params,
                                       const StepCallback& on_step = nullptr);

}  // namespace affect::visual
