#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "affect/data/types.hpp"
#include "affect/schedule.hpp"

namespace affect::metrics {

using AuProbRow = std::array<float, data::kNumAus>;

struct MetricOptions {
  double threshold = 0.5;        // AU decision threshold (>= threshold -> 1)
  double degenerate_f1 = 1.0;    // F1 for a class with TP = FP = FN = 0
  bool au_exact_match = false;   // total accuracy per frame instead of per label
};

// probs >= threshold -> 1, else 0.
std::vector<data::AuVector> threshold_au(const std::vector<AuProbRow>& probs,
                                         double threshold = 0.5);

// Per-class binary F1 = 2TP / (2TP + FP + FN); a class with no positives on
// either side scores degenerate_f1, a class with TP = 0 but errors scores 0.
std::vector<double> binary_f1_per_class(const std::vector<data::AuVector>& preds,
                                        const std::vector<data::AuVector>& labels,
                                        double degenerate_f1 = 1.0);

// Fraction of correct entries over all N x 12 binary decisions.
double total_accuracy_au(const std::vector<data::AuVector>& preds,
                         const std::vector<data::AuVector>& labels);

// Fraction of frames whose full 12-bit AU vector matches exactly.
double exact_match_accuracy_au(const std::vector<data::AuVector>& preds,
                               const std::vector<data::AuVector>& labels);

// One-vs-rest per-class F1 plus exact-frame accuracy.
std::pair<std::vector<double>, double> expr_f1_and_accuracy(
    const std::vector<int>& preds, const std::vector<int>& labels,
    double degenerate_f1 = 1.0);

// AU: 0.5 * F1 + 0.5 * accuracy.  Expression: 0.67 * F1 + 0.33 * accuracy.
double composite_score(Task task, double macro_f1, double accuracy);

struct MetricReport {
  Task task = Task::au;
  std::vector<double> per_class_f1;
  double macro_f1 = 0.0;
  double total_accuracy = 0.0;
  double composite = 0.0;
  std::int64_t frames = 0;
  std::int64_t decisions = 0;
  std::vector<std::int64_t> per_class_support;
  double threshold = 0.5;
  int skipped_videos = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // header line + one data line
  void write(const std::filesystem::path& json_path,
             const std::filesystem::path& csv_path) const;
};

MetricReport evaluate_au(const std::vector<data::AuVector>& preds,
                         const std::vector<data::AuVector>& labels,
                         const MetricOptions& options = {});

MetricReport evaluate_expression(const std::vector<int>& preds,
                                 const std::vector<int>& labels,
                                 const MetricOptions& options = {});

}  // namespace affect::metrics
