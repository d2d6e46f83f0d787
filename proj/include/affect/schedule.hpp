#pragma once

#include <string>

#include "affect/errors.hpp"

namespace affect {

enum class Task { au, expression };

inline const char* task_name(Task t) { return t == Task::au ? "au" : "expression"; }

// Rotation scheme for the two task heads: either whole epochs alternate or
// consecutive batches do. The first task owns parity 0.
struct AlternationSchedule {
  enum class Mode { epoch_by_epoch, batch_by_batch };
  Mode mode = Mode::epoch_by_epoch;
  Task first_task = Task::expression;
};

// epoch is 1-based, batch is 0-based.
inline Task select_task(const AlternationSchedule& schedule, int epoch, int batch) {
  if (epoch < 1) throw ContractError("epoch must be >= 1");
  if (batch < 0) throw ContractError("batch must be >= 0");
  const int parity = schedule.mode == AlternationSchedule::Mode::epoch_by_epoch
                         ? (epoch - 1) % 2
                         : batch % 2;
  const Task other =
      schedule.first_task == Task::au ? Task::expression : Task::au;
  return parity == 0 ? schedule.first_task : other;
}

inline AlternationSchedule::Mode alternation_mode_from_string(const std::string& s) {
  if (s == "epoch" || s == "epoch_by_epoch") return AlternationSchedule::Mode::epoch_by_epoch;
  if (s == "batch" || s == "batch_by_batch") return AlternationSchedule::Mode::batch_by_batch;
  throw ConfigError("unknown alternation mode: " + s);
}

inline Task task_from_string(const std::string& s) {
  if (s == "au") return Task::au;
  if (s == "expression" || s == "expr") return Task::expression;
  throw ConfigError("unknown task: " + s);
}

}  // namespace affect
