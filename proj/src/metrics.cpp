#include "affect/metrics.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

#include "affect/errors.hpp"

namespace affect::metrics {

std::vector<data::AuVector> threshold_au(const std::vector<AuProbRow>& probs,
                                         double threshold) {
  std::vector<data::AuVector> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (std::size_t j = 0; j < data::kNumAus; ++j)
      out[i][j] = probs[i][j] >= threshold ? 1 : 0;
  return out;
}

namespace {

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

double f1_from_counts(const Counts& c, double degenerate_f1) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) return degenerate_f1;
  if (c.tp == 0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) /
         static_cast<double>(2 * c.tp + c.fp + c.fn);
}

}  // namespace

std::vector<double> binary_f1_per_class(const std::vector<data::AuVector>& preds,
                                        const std::vector<data::AuVector>& labels,
                                        double degenerate_f1) {
  if (preds.size() != labels.size())
    throw ContractError("binary_f1_per_class: prediction/label count mismatch");
  std::array<Counts, data::kNumAus> counts{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < data::kNumAus; ++j) {
      const bool p = preds[i][j] != 0, l = labels[i][j] != 0;
      if (p && l)
        ++counts[j].tp;
      else if (p && !l)
        ++counts[j].fp;
      else if (!p && l)
        ++counts[j].fn;
    }
  }
  std::vector<double> f1(data::kNumAus);
  for (std::size_t j = 0; j < data::kNumAus; ++j)
    f1[j] = f1_from_counts(counts[j], degenerate_f1);
  return f1;
}

double total_accuracy_au(const std::vector<data::AuVector>& preds,
                         const std::vector<data::AuVector>& labels) {
  if (preds.size() != labels.size())
    throw ContractError("total_accuracy_au: prediction/label count mismatch");
  if (preds.empty()) return 0.0;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t j = 0; j < data::kNumAus; ++j)
      if (preds[i][j] == labels[i][j]) ++correct;
  return static_cast<double>(correct) /
         static_cast<double>(preds.size() * data::kNumAus);
}

double exact_match_accuracy_au(const std::vector<data::AuVector>& preds,
                               const std::vector<data::AuVector>& labels) {
  if (preds.size() != labels.size())
    throw ContractError("exact_match_accuracy_au: prediction/label count mismatch");
  if (preds.empty()) return 0.0;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::pair<std::vector<double>, double> expr_f1_and_accuracy(
    const std::vector<int>& preds, const std::vector<int>& labels,
    double degenerate_f1) {
  if (preds.size() != labels.size())
    throw ContractError("expr_f1_and_accuracy: prediction/label count mismatch");
  std::array<Counts, data::kNumExpressions> counts{};
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], l = labels[i];
    if (p < 0 || p >= data::kNumExpressions || l < 0 || l >= data::kNumExpressions)
      throw ContractError("expression values must be in [0, 6]");
    if (p == l) {
      ++correct;
      ++counts[static_cast<std::size_t>(p)].tp;
    } else {
      ++counts[static_cast<std::size_t>(p)].fp;
      ++counts[static_cast<std::size_t>(l)].fn;
    }
  }
  std::vector<double> f1(data::kNumExpressions);
  for (std::size_t j = 0; j < data::kNumExpressions; ++j)
    f1[j] = f1_from_counts(counts[j], degenerate_f1);
  const double acc =
      preds.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(preds.size());
  return {f1, acc};
}

double composite_score(Task task, double macro_f1, double accuracy) {
  if (macro_f1 < 0.0 || macro_f1 > 1.0 || accuracy < 0.0 || accuracy > 1.0)
    throw ContractError("composite_score inputs must be in [0, 1]");
  return task == Task::au ? 0.5 * macro_f1 + 0.5 * accuracy
                          : 0.67 * macro_f1 + 0.33 * accuracy;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["task"] = task_name(task);
  j["per_class_f1"] = per_class_f1;
  j["macro_f1"] = macro_f1;
  j["total_accuracy"] = total_accuracy;
  j["composite"] = composite;
  j["frames"] = frames;
  j["decisions"] = decisions;
  j["per_class_support"] = per_class_support;
  j["threshold"] = threshold;
  j["skipped_videos"] = skipped_videos;
  return j;
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << "task,macro_f1,total_accuracy,composite,frames\n";
  out << task_name(task) << ',' << macro_f1 << ',' << total_accuracy << ','
      << composite << ',' << frames << '\n';
  return out.str();
}

void MetricReport::write(const std::filesystem::path& json_path,
                         const std::filesystem::path& csv_path) const {
  std::ofstream(json_path) << to_json().dump(2) << '\n';
  std::ofstream(csv_path) << to_csv();
}

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

MetricReport evaluate_au(const std::vector<data::AuVector>& preds,
                         const std::vector<data::AuVector>& labels,
                         const MetricOptions& options) {
  MetricReport report;
  report.task = Task::au;
  report.per_class_f1 = binary_f1_per_class(preds, labels, options.degenerate_f1);
  report.macro_f1 = mean(report.per_class_f1);
  report.total_accuracy = options.au_exact_match
                              ? exact_match_accuracy_au(preds, labels)
                              : total_accuracy_au(preds, labels);
  report.composite = composite_score(Task::au, report.macro_f1, report.total_accuracy);
  report.frames = static_cast<std::int64_t>(preds.size());
  report.decisions = report.frames * data::kNumAus;
  report.per_class_support.assign(data::kNumAus, 0);
  for (const auto& row : labels)
    for (std::size_t j = 0; j < data::kNumAus; ++j)
      if (row[j]) ++report.per_class_support[j];
  report.threshold = options.threshold;
  return report;
}

MetricReport evaluate_expression(const std::vector<int>& preds,
                                 const std::vector<int>& labels,
                                 const MetricOptions& options) {
  MetricReport report;
  report.task = Task::expression;
  auto [f1, acc] = expr_f1_and_accuracy(preds, labels, options.degenerate_f1);
  report.per_class_f1 = std::move(f1);
  report.macro_f1 = mean(report.per_class_f1);
  report.total_accuracy = acc;
  report.composite =
      composite_score(Task::expression, report.macro_f1, report.total_accuracy);
  report.frames = static_cast<std::int64_t>(preds.size());
  report.decisions = report.frames;
  report.per_class_support.assign(data::kNumExpressions, 0);
  for (const int l : labels) ++report.per_class_support[static_cast<std::size_t>(l)];
  report.threshold = options.threshold;
  return report;
}

}  // namespace affect::metrics
