#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "affect/errors.hpp"
#include "affect/pipeline/orchestrator.hpp"

namespace affect::pipeline {

namespace {

// Optional CLI values; only values the user actually passed override the
// config file, which in turn overrides built-in defaults.
struct CliOverrides {
  std::optional<std::string> data_dir, out_dir, aux_au_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> alternation;
  std::optional<int> workers;
  std::optional<double> threshold;
  std::optional<double> fps;
  std::optional<int> epochs, steps;
  std::optional<std::string> dedup;
  std::optional<int> synth_videos, synth_frames, synth_rate;
  std::optional<double> synth_fps;

  void apply(PipelineConfig& cfg) const {
    if (data_dir) cfg.data_dir = *data_dir;
    if (out_dir) cfg.out_dir = *out_dir;
    if (aux_au_dir) cfg.aux_au_dir = *aux_au_dir;
    if (seed) cfg.seed = *seed;
    if (alternation) cfg.alternation = *alternation;
    if (workers) cfg.workers = *workers;
    if (threshold) cfg.threshold = *threshold;
    if (fps) cfg.default_fps = *fps;
    if (epochs) cfg.visual_epochs = *epochs;
    if (steps) cfg.seq_steps = *steps;
    if (dedup) cfg.dedup = *dedup;
    if (synth_videos) cfg.synth_videos = *synth_videos;
    if (synth_frames) cfg.synth_frames = *synth_frames;
    if (synth_rate) cfg.synth_rate = *synth_rate;
    if (synth_fps) cfg.synth_fps = *synth_fps;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Audio-visual multi-task facial behavior pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  CliOverrides over;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--data", over.data_dir, "dataset root directory");
  app.add_option("--out", over.out_dir, "run output directory");
  app.add_option("--seed", over.seed, "master seed");
  app.add_option("--alternation", over.alternation, "epoch | batch")
      ->check(CLI::IsMember({"epoch", "batch"}));
  app.add_option("--workers", over.workers, "parallel data workers");
  app.add_option("--threshold", over.threshold, "AU decision threshold");
  app.add_option("--fps", over.fps, "default frame rate for videos without metadata");

  auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
  synth->add_option("--videos", over.synth_videos, "total videos (1/3 becomes val)");
  synth->add_option("--frames", over.synth_frames, "frames per video");
  synth->add_option("--synth-fps", over.synth_fps, "synthetic video frame rate");
  synth->add_option("--rate", over.synth_rate, "audio sample rate");

  auto* prepare = app.add_subcommand("prepare-data", "parse, clean and split annotations");
  prepare->add_option("--aux-au", over.aux_au_dir, "auxiliary AU-only dataset root");
  prepare->add_option("--dedup", over.dedup, "video | frame overlap removal")
      ->check(CLI::IsMember({"video", "frame"}));

  std::string stats_split = "train";
  auto* stats = app.add_subcommand("stats", "label balance statistics");
  stats->add_option("--split", stats_split, "train | val");

  auto* train_visual = app.add_subcommand("train-visual", "stage 1: multi-task frame model");
  train_visual->add_option("--epochs", over.epochs, "total alternating epochs");

  auto* train_seq =
      app.add_subcommand("train-audio-sequence", "stages 2+3: audio + sequence model");
  train_seq->add_option("--steps", over.steps, "optimizer steps");

  std::string eval_split = "val";
  auto* evaluate = app.add_subcommand("evaluate", "run inference and score a split");
  evaluate->add_option("--split", eval_split, "train | val");

  // Global flags may appear after the subcommand name.
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> argv_like = args;
  try {
    std::vector<const char*> argv;
    argv.push_back("affect");
    for (const auto& a : argv_like) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config_entries(cfg, parse_config_file(config_path));
    over.apply(cfg);

    if (synth->parsed()) {
      if (cfg.data_dir.empty() && !cfg.out_dir.empty()) cfg.data_dir = cfg.out_dir;
      cmd_synth(cfg);
    } else if (prepare->parsed()) {
      cmd_prepare_data(cfg);
    } else if (stats->parsed()) {
      cmd_stats(cfg, stats_split);
    } else if (train_visual->parsed()) {
      cmd_train_visual(cfg);
    } else if (train_seq->parsed()) {
      cmd_train_sequence(cfg);
    } else if (evaluate->parsed()) {
      cmd_evaluate(cfg, eval_split);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace affect::pipeline
