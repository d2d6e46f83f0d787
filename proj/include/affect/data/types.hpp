#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affect::data {

inline constexpr int kNumAus = 12;
inline constexpr int kNumExpressions = 7;

// Canonical AU numbering used for stats output and reporting.
inline constexpr std::array<int, kNumAus> kAuNumbers = {1,  2,  4,  6,  7,  10,
                                                        12, 15, 23, 24, 25, 26};

using AuVector = std::array<std::uint8_t, kNumAus>;

// One annotated video frame. At least one of au/expr is present; au never
// contains values outside {0,1} (invalid rows are dropped at ingestion).
struct FrameAnnotation {
  std::string video_id;
  int frame_index = 0;
  std::optional<AuVector> au;
  std::optional<int> expr;

  bool operator==(const FrameAnnotation&) const = default;
};

struct AudioTrack {
  std::vector<float> samples;  // mono, [-1, 1]
  int sample_rate = 0;
};

struct VideoRecord {
  std::string video_id;
  double fps = 30.0;
  // Dense frame references 0..n-1; files may be absent on disk until
  // filter_missing_crops prunes their annotations.
  std::vector<std::filesystem::path> frame_paths;
  std::filesystem::path audio_path;  // empty when the video has no audio

  int frame_count() const { return static_cast<int>(frame_paths.size()); }
  bool has_audio() const { return !audio_path.empty(); }
};

struct DatasetSplit {
  std::string name;  // train | val
  std::vector<FrameAnnotation> annotations;
  std::map<std::string, VideoRecord> videos;
};

struct BalanceStats {
  std::array<std::int64_t, kNumAus> au_positive_counts{};
  std::array<std::int64_t, kNumAus> au_negative_counts{};
  std::array<std::int64_t, kNumExpressions> expr_counts{};
};

}  // namespace affect::data
