#include "affect/pipeline/orchestrator.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "affect/audio/tdnn.hpp"
#include "affect/data/annotations.hpp"
#include "affect/data/media.hpp"
#include "affect/data/split_json.hpp"
#include "affect/data/synthetic.hpp"
#include "affect/errors.hpp"
#include "affect/hash.hpp"
#include "affect/metrics.hpp"
#include "affect/pipeline/manifest.hpp"
#include "affect/seq/train.hpp"
#include "affect/visual/train.hpp"

namespace affect::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::string label)
      : label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::cout << "[" << label_ << "] done in " << secs << " s\n";
  }

 private:
  std::string label_;
  std::chrono::steady_clock::time_point start_;
};

losses::BceParams bce_from_stats(const data::BalanceStats& stats,
                                 const PipelineConfig& cfg) {
  losses::BceParams params;
  params.pos_weight = data::positive_weights(stats, cfg.w_max);
  return params;
}

// Inverse-frequency alpha scaled so the largest weight is 1 (keeps every
// component inside (0, 1]).
losses::FocalParams focal_from_stats(const data::BalanceStats& stats,
                                     const PipelineConfig& cfg) {
  losses::FocalParams params;
  params.gamma = cfg.focal_gamma;
  params.alpha = Eigen::VectorXd::Ones(data::kNumExpressions);
  if (cfg.alpha_mode == "inverse_frequency") {
    Eigen::VectorXd inv(data::kNumExpressions);
    for (int i = 0; i < data::kNumExpressions; ++i)
      inv[i] = 1.0 / static_cast<double>(std::max<std::int64_t>(
                         stats.expr_counts[static_cast<std::size_t>(i)], 1));
    params.alpha = inv / inv.maxCoeff();
  }
  return params;
}

AlternationSchedule schedule_from(const PipelineConfig& cfg) {
  return {alternation_mode_from_string(cfg.alternation), task_from_string(cfg.first_task)};
}

fs::path prepared_dir(const PipelineConfig& cfg) { return cfg.out_dir / "prepared"; }

data::DatasetSplit load_prepared(const PipelineConfig& cfg, const std::string& name) {
  const fs::path path = prepared_dir(cfg) / (name + ".json");
  if (!fs::exists(path))
    throw DataError("missing prepared split " + path.string() + "; run prepare-data first");
  return data::load_split_json(path);
}

// Union of two per-task splits into one record set with merged labels.
data::DatasetSplit merge_for_sequence(const data::DatasetSplit& au_split,
                                      const data::DatasetSplit& expr_split,
                                      const std::string& name) {
  data::DatasetSplit merged;
  merged.name = name;
  merged.videos = au_split.videos;
  for (const auto& [vid, rec] : expr_split.videos) merged.videos.emplace(vid, rec);

  std::map<std::pair<std::string, int>, data::FrameAnnotation> by_key;
  for (const auto& ann : au_split.annotations)
    if (ann.au) {
      auto& slot = by_key[{ann.video_id, ann.frame_index}];
      slot.video_id = ann.video_id;
      slot.frame_index = ann.frame_index;
      slot.au = ann.au;
    }
  for (const auto& ann : expr_split.annotations)
    if (ann.expr) {
      auto& slot = by_key[{ann.video_id, ann.frame_index}];
      slot.video_id = ann.video_id;
      slot.frame_index = ann.frame_index;
      slot.expr = ann.expr;
    }
  merged.annotations.reserve(by_key.size());
  for (auto& [_, ann] : by_key) merged.annotations.push_back(std::move(ann));
  return merged;
}

void write_visual_history_csv(const fs::path& path,
                              const std::vector<visual::TrainStep>& history) {
  std::ofstream out(path);
  out << "step,epoch,task,loss,grad_norm\n";
  for (const auto& h : history)
    out << h.step << ',' << h.epoch << ',' << task_name(h.task) << ',' << h.loss << ','
        << h.grad_norm << '\n';
}

void write_sequence_history_csv(const fs::path& path,
                                const std::vector<seq::SeqTrainStep>& history) {
  std::ofstream out(path);
  out << "step,task,loss,grad_norm\n";
  for (const auto& h : history)
    out << h.step << ',' << task_name(h.task) << ',' << h.loss << ',' << h.grad_norm << '\n';
}

constexpr const char* kVisualCkpt = "checkpoints/visual.ckpt";
constexpr const char* kAudioSeqCkpt = "checkpoints/audio_sequence.ckpt";

void save_audio_sequence_checkpoint(const fs::path& path, audio::TdnnModel& tdnn,
                                    seq::SequenceModel& model,
                                    const std::string& visual_hash) {
  Checkpoint ckpt;
  const auto& tc = tdnn.config();
  const auto& sc = model.config();
  ckpt.meta()["model"] = "audio_sequence";
  ckpt.meta()["tdnn"] = {{"in_dim", tc.in_dim}, {"hidden", tc.hidden}, {"out_dim", tc.out_dim}};
  ckpt.meta()["sequence"] = {{"d_model", sc.d_model},
                             {"heads", sc.heads},
                             {"ff_dim", sc.ff_dim},
                             {"dropout", sc.dropout},
                             {"encoder_layers", sc.encoder_layers},
                             {"positional_encoding", sc.positional_encoding},
                             {"window", sc.window}};
  ckpt.meta()["visual_checkpoint_sha256"] = visual_hash;
  nn::StateRefs refs;
  tdnn.state(refs);
  model.state(refs);
  for (const auto& [name, tensor] : refs) ckpt.add(name, *tensor);
  ckpt.save(path);
}

std::pair<audio::TdnnModel, seq::SequenceModel> load_audio_sequence_checkpoint(
    const fs::path& path) {
  const Checkpoint ckpt = Checkpoint::load(path);
  const auto& meta = ckpt.meta();
  if (!meta.contains("model") || meta["model"] != "audio_sequence")
    throw CheckpointError("checkpoint does not hold the audio+sequence stage: " +
                          path.string());
  audio::TdnnConfig tc;
  tc.in_dim = meta["tdnn"]["in_dim"].get<int>();
  tc.hidden = meta["tdnn"]["hidden"].get<int>();
  tc.out_dim = meta["tdnn"]["out_dim"].get<int>();
  seq::SequenceModelConfig sc;
  sc.d_model = meta["sequence"]["d_model"].get<int>();
  sc.heads = meta["sequence"]["heads"].get<int>();
  sc.ff_dim = meta["sequence"]["ff_dim"].get<int>();
  sc.dropout = meta["sequence"]["dropout"].get<float>();
  sc.encoder_layers = meta["sequence"]["encoder_layers"].get<int>();
  sc.positional_encoding = meta["sequence"]["positional_encoding"].get<bool>();
  sc.window = meta["sequence"]["window"].get<int>();

  std::pair<audio::TdnnModel, seq::SequenceModel> models{audio::TdnnModel(tc),
                                                         seq::SequenceModel(sc, 0)};
  nn::StateRefs refs;
  models.first.state(refs);
  models.second.state(refs);
  for (auto& [name, tensor] : refs) {
    const Tensor& stored = ckpt.get(name);
    if (!stored.same_shape(*tensor))
      throw CheckpointError("tensor shape mismatch for " + name);
    *tensor = stored;
  }
  return models;
}

}  // namespace

void cmd_synth(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.data_dir.empty()) throw ConfigError("synth needs a dataset directory (--data)");
  StageTimer timer("synth");
  data::SyntheticConfig synth;
  synth.n_videos = cfg.synth_videos;
  synth.frames_per_video = cfg.synth_frames;
  synth.fps = cfg.synth_fps;
  synth.sample_rate = cfg.synth_rate;
  const auto dataset = data::generate_synthetic_dataset(
      synth, stage_seed(cfg.seed, Stage::synth), cfg.data_dir, cfg.workers);
  std::cout << "[synth] wrote " << dataset.train.annotations.size() << " train and "
            << dataset.val.annotations.size() << " val annotated frames under "
            << cfg.data_dir << "\n";
}

void cmd_prepare_data(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.data_dir.empty() || cfg.out_dir.empty())
    throw ConfigError("prepare-data needs --data and --out");
  if (!fs::is_directory(cfg.data_dir))
    throw DataError("dataset directory not found: " + cfg.data_dir.string());
  StageTimer timer("prepare-data");
  DirLock lock(cfg.out_dir);
  RunManifest manifest(cfg.out_dir);
  manifest.set_config(cfg.snapshot());

  std::map<std::string, data::VideoMeta> meta;
  const fs::path meta_csv = cfg.data_dir / "videos.csv";
  const bool has_meta = fs::exists(meta_csv);
  if (has_meta) meta = data::read_videos_csv(meta_csv);

  const auto parse_and_attach = [&](const fs::path& au_dir, const fs::path& expr_dir,
                                    const std::string& name) {
    auto split = data::parse_annotations(au_dir, expr_dir, name);
    data::attach_media(split, cfg.data_dir / "frames", cfg.data_dir / "audio",
                       cfg.default_fps, has_meta ? &meta : nullptr);
    return split;
  };

  auto au_train = parse_and_attach(cfg.data_dir / "au" / "train", "", "train");
  auto au_val = parse_and_attach(cfg.data_dir / "au" / "val", "", "val");
  auto expr_train = parse_and_attach("", cfg.data_dir / "expr" / "train", "train");
  auto expr_val = parse_and_attach("", cfg.data_dir / "expr" / "val", "val");
  if (au_train.annotations.empty()) throw DataError("AU training split is empty");
  if (expr_train.annotations.empty()) throw DataError("expression training split is empty");

  json report;
  const auto filter_split = [&report](data::DatasetSplit& split, const std::string& key) {
    auto result = data::filter_missing_crops(split);
    report["missing_crops"][key] = result.removed;
    split = std::move(result.split);
  };
  filter_split(au_train, "au_train");
  filter_split(au_val, "au_val");
  filter_split(expr_train, "expr_train");
  filter_split(expr_val, "expr_val");

  if (!cfg.aux_au_dir.empty()) {
    auto aux = data::parse_annotations(cfg.aux_au_dir / "au", "", "train");
    data::attach_media(aux, cfg.aux_au_dir / "frames", cfg.aux_au_dir / "audio",
                       cfg.default_fps, nullptr);
    auto filtered = data::filter_missing_crops(aux);
    report["auxiliary"] = {{"annotations", filtered.split.annotations.size()},
                           {"missing_crops", filtered.removed}};
    au_train = data::merge_auxiliary_au(au_train, filtered.split);
  }

  const auto granularity = cfg.dedup == "video" ? data::DedupGranularity::video
                                                : data::DedupGranularity::frame;
  auto dedup = data::deduplicate_validation(au_train, au_val, expr_train, expr_val,
                                            granularity);
  au_val = std::move(dedup.au_val);
  expr_val = std::move(dedup.expr_val);
  report["dedup"] = {{"granularity", cfg.dedup},
                     {"au_val_removed_annotations", dedup.au_removed_annotations},
                     {"au_val_removed_videos", dedup.au_removed_videos},
                     {"expr_val_removed_annotations", dedup.expr_removed_annotations},
                     {"expr_val_removed_videos", dedup.expr_removed_videos}};

  for (const auto* split : {&au_train, &au_val, &expr_train, &expr_val})
    data::validate_split(*split);
  report["counts"] = {{"au_train", au_train.annotations.size()},
                      {"au_val", au_val.annotations.size()},
                      {"expr_train", expr_train.annotations.size()},
                      {"expr_val", expr_val.annotations.size()}};

  const fs::path dir = prepared_dir(cfg);
  fs::create_directories(dir);
  data::save_split_json(au_train, dir / "au_train.json");
  data::save_split_json(au_val, dir / "au_val.json");
  data::save_split_json(expr_train, dir / "expr_train.json");
  data::save_split_json(expr_val, dir / "expr_val.json");

  // AU counts come from the AU training split, expression counts from the
  // expression training split.
  data::BalanceStats stats = data::compute_balance_stats(au_train);
  stats.expr_counts = data::compute_balance_stats(expr_train).expr_counts;
  data::write_stats_csv(stats, dir / "stats_au.csv", dir / "stats_expr.csv");
  std::ofstream(dir / "prepare_report.json") << report.dump(2) << '\n';

  manifest.record_input("annotations.au", hash_directory(cfg.data_dir / "au"));
  manifest.record_input("annotations.expr", hash_directory(cfg.data_dir / "expr"));
  manifest.record_input("frames", hash_directory(cfg.data_dir / "frames"));
  manifest.record_input("audio", hash_directory(cfg.data_dir / "audio"));
  if (has_meta) manifest.record_input("videos.csv", sha256_file(meta_csv));
  for (const char* name :
       {"au_train.json", "au_val.json", "expr_train.json", "expr_val.json",
        "stats_au.csv", "stats_expr.csv", "prepare_report.json"})
    manifest.record_file(dir / name);
  manifest.set_stage("prepare", report);
  manifest.save();

  std::cout << "[prepare-data] au_train=" << au_train.annotations.size()
            << " au_val=" << au_val.annotations.size()
            << " expr_train=" << expr_train.annotations.size()
            << " expr_val=" << expr_val.annotations.size()
            << " dedup_removed=" << dedup.au_removed_annotations << "+"
            << dedup.expr_removed_annotations << "\n";
}

void cmd_stats(const PipelineConfig& cfg, const std::string& split) {
  cfg.validate();
  if (cfg.data_dir.empty()) throw ConfigError("stats needs --data");
  if (split != "train" && split != "val") throw ConfigError("split must be train or val");
  auto au = data::parse_annotations(cfg.data_dir / "au" / split, "", split);
  auto expr = data::parse_annotations("", cfg.data_dir / "expr" / split, split);
  auto stats = data::compute_balance_stats(au);
  stats.expr_counts = data::compute_balance_stats(expr).expr_counts;

  const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : cfg.out_dir;
  fs::create_directories(dir);
  const fs::path au_csv = dir / ("stats_au_" + split + ".csv");
  const fs::path expr_csv = dir / ("stats_expr_" + split + ".csv");
  data::write_stats_csv(stats, au_csv, expr_csv);
  std::cout << "label,positive,negative\n";
  for (int i = 0; i < data::kNumAus; ++i)
    std::cout << "AU" << data::kAuNumbers[static_cast<std::size_t>(i)] << ','
              << stats.au_positive_counts[static_cast<std::size_t>(i)] << ','
              << stats.au_negative_counts[static_cast<std::size_t>(i)] << '\n';
  std::cout << "class,count\n";
  for (int i = 0; i < data::kNumExpressions; ++i)
    std::cout << i << ',' << stats.expr_counts[static_cast<std::size_t>(i)] << '\n';
}

void cmd_train_visual(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.out_dir.empty()) throw ConfigError("train-visual needs --out");
  StageTimer timer("train-visual");
  DirLock lock(cfg.out_dir);
  RunManifest manifest(cfg.out_dir);
  manifest.set_config(cfg.snapshot());

  const auto au_train = load_prepared(cfg, "au_train");
  const auto expr_train = load_prepared(cfg, "expr_train");

  const auto bce = bce_from_stats(data::compute_balance_stats(au_train), cfg);
  const auto focal = focal_from_stats(data::compute_balance_stats(expr_train), cfg);

  visual::VisualModelConfig model_cfg;
  model_cfg.channels = cfg.backbone_channels;
  visual::VisualModel model(model_cfg, stage_seed(cfg.seed, Stage::visual));

  visual::VisualTrainConfig train_cfg;
  train_cfg.sgd = {cfg.visual_lr, cfg.visual_momentum, cfg.clip_norm};
  train_cfg.batch_size = cfg.visual_batch;
  train_cfg.epochs = cfg.visual_epochs;
  train_cfg.augment_enabled = cfg.augment;
  train_cfg.seed = stage_seed(cfg.seed, Stage::visual) + 1;

  const auto history = visual::train_multitask(model, au_train, expr_train,
                                               schedule_from(cfg), train_cfg, bce, focal);

  fs::create_directories(cfg.out_dir / "checkpoints");
  fs::create_directories(cfg.out_dir / "history");
  const fs::path ckpt_path = cfg.out_dir / kVisualCkpt;
  json extra = {{"alternation", cfg.alternation},
                {"first_task", cfg.first_task},
                {"epochs", cfg.visual_epochs}};
  model.save(ckpt_path, extra);
  const fs::path history_path = cfg.out_dir / "history" / "visual_history.csv";
  write_visual_history_csv(history_path, history);

  manifest.record_file(ckpt_path);
  manifest.record_file(history_path);
  manifest.set_stage("visual",
                     {{"checkpoint", std::string(kVisualCkpt)},
                      {"checkpoint_sha256", sha256_file(ckpt_path)},
                      {"steps", history.size()},
                      {"final_loss", history.empty() ? 0.0 : history.back().loss}});
  manifest.save();
  std::cout << "[train-visual] " << history.size() << " steps, final loss "
            << (history.empty() ? 0.0 : history.back().loss) << "\n";
}

void cmd_train_sequence(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.out_dir.empty()) throw ConfigError("train-audio-sequence needs --out");
  StageTimer timer("train-audio-sequence");
  DirLock lock(cfg.out_dir);
  RunManifest manifest(cfg.out_dir);
  manifest.set_config(cfg.snapshot());

  const fs::path visual_path = cfg.out_dir / kVisualCkpt;
  if (!fs::exists(visual_path))
    throw CheckpointError("visual checkpoint not found: " + visual_path.string() +
                          "; run train-visual first");
  const std::string visual_hash_before = sha256_file(visual_path);
  visual::VisualModel visual_model = visual::VisualModel::load(visual_path);
  visual_model.set_frozen(true);

  const auto au_train = load_prepared(cfg, "au_train");
  const auto expr_train = load_prepared(cfg, "expr_train");
  const auto merged = merge_for_sequence(au_train, expr_train, "train");

  const auto bce = bce_from_stats(data::compute_balance_stats(au_train), cfg);
  const auto focal = focal_from_stats(data::compute_balance_stats(expr_train), cfg);

  auto corpus = seq::build_sequence_corpus(merged);

  const std::uint64_t seq_seed = stage_seed(cfg.seed, Stage::sequence);
  audio::TdnnModel tdnn;
  {
    Rng rng(Rng::mix(seq_seed, 7));
    tdnn.init(rng);
  }
  seq::SequenceModelConfig seq_cfg;
  seq_cfg.heads = cfg.heads;
  seq_cfg.ff_dim = cfg.ff_dim;
  seq_cfg.dropout = cfg.dropout;
  seq_cfg.encoder_layers = cfg.encoder_layers;
  seq_cfg.positional_encoding = cfg.positional_encoding;
  seq_cfg.window = cfg.window;
  seq::SequenceModel seq_model(seq_cfg, seq_seed);

  seq::SequenceTrainConfig train_cfg;
  train_cfg.sgd = {cfg.seq_lr, cfg.seq_momentum, cfg.clip_norm};
  train_cfg.steps = cfg.seq_steps;
  train_cfg.batch_windows = cfg.seq_batch_windows;
  train_cfg.seed = seq_seed + 1;

  const auto history = seq::train_sequence(corpus, visual_model, tdnn, seq_model,
                                           schedule_from(cfg), train_cfg, bce, focal);

  const std::string visual_hash_after = sha256_file(visual_path);
  if (visual_hash_after != visual_hash_before)
    throw CheckpointError("visual checkpoint changed during stage-2/3 training");

  fs::create_directories(cfg.out_dir / "checkpoints");
  fs::create_directories(cfg.out_dir / "history");
  const fs::path ckpt_path = cfg.out_dir / kAudioSeqCkpt;
  save_audio_sequence_checkpoint(ckpt_path, tdnn, seq_model, visual_hash_before);
  const fs::path history_path = cfg.out_dir / "history" / "sequence_history.csv";
  write_sequence_history_csv(history_path, history);

  manifest.record_file(ckpt_path);
  manifest.record_file(history_path);
  manifest.set_stage("sequence",
                     {{"checkpoint", std::string(kAudioSeqCkpt)},
                      {"checkpoint_sha256", sha256_file(ckpt_path)},
                      {"visual_checkpoint_sha256", visual_hash_before},
                      {"visual_unchanged", true},
                      {"steps", history.size()},
                      {"final_loss", history.empty() ? 0.0 : history.back().loss}});
  manifest.save();
  std::cout << "[train-audio-sequence] " << history.size() << " steps, final loss "
            << (history.empty() ? 0.0 : history.back().loss) << "\n";
}

void cmd_evaluate(const PipelineConfig& cfg, const std::string& split) {
  cfg.validate();
  if (cfg.out_dir.empty()) throw ConfigError("evaluate needs --out");
  if (split != "train" && split != "val") throw ConfigError("split must be train or val");
  StageTimer timer("evaluate");
  DirLock lock(cfg.out_dir);
  RunManifest manifest(cfg.out_dir);
  manifest.set_config(cfg.snapshot());

  const fs::path visual_path = cfg.out_dir / kVisualCkpt;
  const fs::path seq_path = cfg.out_dir / kAudioSeqCkpt;
  if (!fs::exists(visual_path))
    throw CheckpointError("visual checkpoint not found: " + visual_path.string());
  if (!fs::exists(seq_path))
    throw CheckpointError("audio+sequence checkpoint not found: " + seq_path.string());
  visual::VisualModel visual_model = visual::VisualModel::load(visual_path);
  visual_model.set_frozen(true);
  auto [tdnn, seq_model] = load_audio_sequence_checkpoint(seq_path);

  const auto au_split = load_prepared(cfg, "au_" + split);
  const auto expr_split = load_prepared(cfg, "expr_" + split);
  const auto merged = merge_for_sequence(au_split, expr_split, split);

  auto corpus = seq::build_sequence_corpus(merged);
  seq::fill_visual_features(visual_model, corpus);

  // predictions per video
  std::map<std::string, seq::VideoPredictions> by_video;
  int skipped = 0;
  for (const auto& video : corpus.videos) {
    bool any_label = false;
    for (int f = 0; f < video.frame_count; ++f)
      if (video.au[static_cast<std::size_t>(f)] || video.expr[static_cast<std::size_t>(f)]) {
        any_label = true;
        break;
      }
    if (!any_label || video.frame_count == 0) {
      std::cerr << "[evaluate] warning: skipping video without valid frames: "
                << video.video_id << "\n";
      ++skipped;
      continue;
    }
    by_video[video.video_id] = seq::predict_video(video, tdnn, seq_model);
  }

  // prediction files
  const fs::path pred_dir = cfg.out_dir / "predictions";
  fs::create_directories(pred_dir);
  std::vector<fs::path> emitted;
  for (const auto& [vid, preds] : by_video) {
    const std::string safe_vid = [&] {
      std::string s = vid;
      for (auto& c : s)
        if (c == '/') c = '_';
      return s;
    }();
    const fs::path bin_path = pred_dir / (safe_vid + ".csv");
    const fs::path prob_path = pred_dir / (safe_vid + ".probs.csv");
    std::ofstream bin(bin_path);
    std::ofstream prob(prob_path);
    bin << "frame_index";
    prob << "frame_index";
    for (int j = 1; j <= data::kNumAus; ++j) {
      bin << ",au" << j;
      prob << ",au" << j;
    }
    bin << ",expr\n";
    for (int j = 0; j < data::kNumExpressions; ++j) prob << ",expr" << j;
    prob << '\n';
    prob << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < preds.frame_indices.size(); ++i) {
      const auto& p = preds.predictions[i];
      bin << preds.frame_indices[i];
      prob << preds.frame_indices[i];
      int best = 0;
      for (int j = 0; j < data::kNumExpressions; ++j)
        if (p.expr_probs[static_cast<std::size_t>(j)] >
            p.expr_probs[static_cast<std::size_t>(best)])
          best = j;
      for (int j = 0; j < data::kNumAus; ++j) {
        bin << ',' << (p.au_probs[static_cast<std::size_t>(j)] >= cfg.threshold ? 1 : 0);
        prob << ',' << p.au_probs[static_cast<std::size_t>(j)];
      }
      bin << ',' << best << '\n';
      for (int j = 0; j < data::kNumExpressions; ++j)
        prob << ',' << p.expr_probs[static_cast<std::size_t>(j)];
      prob << '\n';
    }
    emitted.push_back(bin_path);
    emitted.push_back(prob_path);
  }

  // metric arrays
  metrics::MetricOptions options;
  options.threshold = cfg.threshold;
  options.degenerate_f1 = cfg.degenerate_f1;
  options.au_exact_match = cfg.au_accuracy == "exact_match";

  std::vector<metrics::AuProbRow> au_probs;
  std::vector<data::AuVector> au_labels;
  for (const auto& ann : au_split.annotations) {
    if (!ann.au) continue;
    const auto it = by_video.find(ann.video_id);
    if (it == by_video.end()) continue;
    au_probs.push_back(
        it->second.predictions[static_cast<std::size_t>(ann.frame_index)].au_probs);
    au_labels.push_back(*ann.au);
  }
  std::vector<int> expr_preds, expr_labels;
  for (const auto& ann : expr_split.annotations) {
    if (!ann.expr) continue;
    const auto it = by_video.find(ann.video_id);
    if (it == by_video.end()) continue;
    const auto& p =
        it->second.predictions[static_cast<std::size_t>(ann.frame_index)].expr_probs;
    int best = 0;
    for (int j = 0; j < data::kNumExpressions; ++j)
      if (p[static_cast<std::size_t>(j)] > p[static_cast<std::size_t>(best)]) best = j;
    expr_preds.push_back(best);
    expr_labels.push_back(*ann.expr);
  }

  auto au_report =
      metrics::evaluate_au(metrics::threshold_au(au_probs, cfg.threshold), au_labels, options);
  au_report.skipped_videos = skipped;
  auto expr_report = metrics::evaluate_expression(expr_preds, expr_labels, options);
  expr_report.skipped_videos = skipped;

  const fs::path report_dir = cfg.out_dir / "reports";
  fs::create_directories(report_dir);
  au_report.write(report_dir / "metrics_au.json", report_dir / "metrics_au.csv");
  expr_report.write(report_dir / "metrics_expr.json", report_dir / "metrics_expr.csv");

  for (const auto& path : emitted) manifest.record_file(path);
  for (const char* name :
       {"metrics_au.json", "metrics_au.csv", "metrics_expr.json", "metrics_expr.csv"})
    manifest.record_file(report_dir / name);
  manifest.set_stage("evaluate." + split, {{"au_composite", au_report.composite},
                                           {"expr_composite", expr_report.composite},
                                           {"au_macro_f1", au_report.macro_f1},
                                           {"au_accuracy", au_report.total_accuracy},
                                           {"expr_macro_f1", expr_report.macro_f1},
                                           {"expr_accuracy", expr_report.total_accuracy},
                                           {"skipped_videos", skipped}});
  manifest.save();

  std::cout << "[evaluate] AU: F1=" << au_report.macro_f1
            << " acc=" << au_report.total_accuracy << " composite=" << au_report.composite
            << "\n[evaluate] EXPR: F1=" << expr_report.macro_f1
            << " acc=" << expr_report.total_accuracy
            << " composite=" << expr_report.composite << "\n";
}

}  // namespace affect::pipeline
