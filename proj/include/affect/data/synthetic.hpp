#pragma once

#include <cstdint>
#include <filesystem>

#include "affect/data/types.hpp"

namespace affect::data {

// Synthetic audio-visual corpus. Labels are redundantly encoded in both
// modalities: each active AU draws a fixed-position colored patch and adds a
// fixed tone; the expression class picks the background hue and a carrier
// tone. Labels change every segment_frames frames within a video.
struct SyntheticConfig {
  int n_videos = 12;  // total; roughly one third becomes validation
  int frames_per_video = 60;
  double fps = 30.0;
  int sample_rate = 16000;
  int segment_frames = 10;
  int image_size = 112;
  int jpeg_quality = 95;

  void validate() const;
};

struct SyntheticDataset {
  DatasetSplit train;
  DatasetSplit val;
};

// Writes the on-disk layout (au/, expr/, frames/, audio/, videos.csv) under
// out_dir and returns the attached splits. Deterministic in (config, seed):
// each video derives its own generator, so worker parallelism cannot change
// the produced bytes.
SyntheticDataset generate_synthetic_dataset(const SyntheticConfig& config,
                                            std::uint64_t seed,
                                            const std::filesystem::path& out_dir,
                                            int workers = 1);

// Split sizing rule used by the generator.
int synthetic_val_count(int n_videos);

}  // namespace affect::data
