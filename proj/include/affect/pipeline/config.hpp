#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace affect::pipeline {

enum class Stage { synth, prepare, visual, sequence, evaluate };

// Per-stage seeds derive from the master seed by fixed offsets so stages can
// rerun independently yet reproducibly.
std::uint64_t stage_seed(std::uint64_t master, Stage stage);

struct PipelineConfig {
  // paths
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  std::filesystem::path aux_au_dir;  // optional AU-only auxiliary training data
  double default_fps = 30.0;

  // visual stage
  float visual_lr = 0.001f;
  float visual_momentum = 0.9f;
  int visual_batch = 64;
  int visual_epochs = 12;
  std::string alternation = "epoch";       // epoch | batch
  std::string first_task = "expression";   // expression | au
  std::vector<int> backbone_channels = {16, 32, 64, 128};
  bool augment = true;

  // sequence stage
  float seq_lr = 0.01f;
  float seq_momentum = 0.9f;
  int seq_steps = 240;
  int seq_batch_windows = 4;
  int window = 30;
  int encoder_layers = 1;
  int heads = 8;
  int ff_dim = 2048;
  float dropout = 0.1f;
  bool positional_encoding = true;

  // losses
  double focal_gamma = 2.0;
  std::string alpha_mode = "inverse_frequency";  // inverse_frequency | uniform
  double w_max = 20.0;

  // metrics
  double threshold = 0.5;
  double degenerate_f1 = 1.0;
  std::string au_accuracy = "per_label";  // per_label | exact_match

  // dataset hygiene
  std::string dedup = "video";  // video | frame

  // misc
  std::uint64_t seed = 42;
  int workers = 1;
  float clip_norm = 5.0f;

  // synthetic generator
  int synth_videos = 12;
  int synth_frames = 60;
  double synth_fps = 30.0;
  int synth_rate = 16000;

  void validate() const;
  nlohmann::json snapshot() const;
};

// Flat "key = value" file with '#' comments. Unknown keys are errors.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);
void apply_config_entries(PipelineConfig& cfg,
                          const std::map<std::string, std::string>& entries);

}  // namespace affect::pipeline
