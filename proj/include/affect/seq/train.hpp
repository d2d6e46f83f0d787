#pragma once

#include <functional>

#include "affect/losses.hpp"
#include "affect/nn/optim.hpp"
#include "affect/seq/corpus.hpp"

namespace affect::seq {

struct SequenceTrainConfig {
  nn::SgdConfig sgd{0.01f, 0.9f, 5.0f};
  int steps = 200;
  int batch_windows = 4;
  std::uint64_t seed = 2;
};

struct SeqTrainStep {
  int step = 0;
  Task task = Task::expression;
  double loss = 0.0;
  double grad_norm = 0.0;
};

using SeqStepCallback =
    std::function<void(const SeqTrainStep&, audio::TdnnModel&, SequenceModel&)>;

// Joint stage-2/3 optimization: the visual model stays frozen (its features
// are precomputed once), while the TDNN and the sequence encoder/heads train
// together. Head alternation is batch-level: step parity selects the task,
// with schedule.first_task on parity 0.
std::vector<SeqTrainStep> train_sequence(SequenceCorpus& corpus,
                                         visual::VisualModel& frozen_visual,
                                         audio::TdnnModel& tdnn, SequenceModel& model,
                                         const AlternationSchedule& schedule,
                                         const SequenceTrainConfig& cfg,
                                         const losses::BceParams& bce_params,
                                         const losses::FocalParams& focal_params,
                                         const SeqStepCallback& on_step = nullptr);

}  // namespace affect::seq
