#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "affect/data/types.hpp"

namespace affect::data {

// Reads per-video annotation files and merges AU and expression labels into
// one split. Either directory may be empty ("" skips that label kind).
// An AU row containing -1 drops the whole AU vector for that frame; an
// expression value of -1 drops the expression; frames left with neither
// label are omitted.
DatasetSplit parse_annotations(const std::filesystem::path& au_dir,
                               const std::filesystem::path& expr_dir,
                               const std::string& split_name = "train");

// Inverse of parse_annotations for frames present in the split. Frames of a
// video below its max annotated index that carry no AU label are written as
// all -1 rows (resp. -1 expression) so line order still encodes frame order.
void write_annotations(const DatasetSplit& split,
                       const std::filesystem::path& au_dir,
                       const std::filesystem::path& expr_dir);

enum class DedupGranularity { video, frame };

struct DedupReport {
  DatasetSplit au_val;
  DatasetSplit expr_val;
  int au_removed_annotations = 0;
  int expr_removed_annotations = 0;
  std::vector<std::string> au_removed_videos;
  std::vector<std::string> expr_removed_videos;
};

// Removes from each task's validation split the frames (or whole videos)
// that occur in the other task's training split.
DedupReport deduplicate_validation(const DatasetSplit& au_train,
                                   const DatasetSplit& au_val,
                                   const DatasetSplit& expr_train,
                                   const DatasetSplit& expr_val,
                                   DedupGranularity granularity = DedupGranularity::video);

struct FilterResult {
  DatasetSplit split;
  int removed = 0;
};

// Drops annotations whose frame image does not exist on disk.
FilterResult filter_missing_crops(const DatasetSplit& split);

BalanceStats compute_balance_stats(const DatasetSplit& split);

// Per-AU positive weights: clamp(neg / max(pos, 1), 1, w_max).
Eigen::VectorXd positive_weights(const BalanceStats& stats, double w_max);

// Merges an AU-only auxiliary split into the main split. Auxiliary video ids
// are namespaced ("aux/<id>"). Auxiliary expression labels are rejected.
DatasetSplit merge_auxiliary_au(const DatasetSplit& main, const DatasetSplit& aux);

// Throws ContractError if split invariants are broken (unknown video ids,
// frame indices beyond the video's frame count, labels out of range).
void validate_split(const DatasetSplit& split);

void write_stats_csv(const BalanceStats& stats,
                     const std::filesystem::path& au_csv,
                     const std::filesystem::path& expr_csv);

}  // namespace affect::data
