#include "affect/pipeline/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <sstream>

#include "affect/errors.hpp"

namespace affect::pipeline {

std::uint64_t stage_seed(std::uint64_t master, Stage stage) {
  switch (stage) {
    case Stage::synth: return master + 101;
    case Stage::prepare: return master + 211;
    case Stage::visual: return master + 307;
    case Stage::sequence: return master + 419;
    case Stage::evaluate: return master + 523;
  }
  throw ContractError("unknown stage");
}

void PipelineConfig::validate() const {
  if (!(visual_lr > 0.0f) || !(seq_lr > 0.0f))
    throw ConfigError("learning rates must be positive");
  if (visual_batch <= 0 || visual_epochs <= 0)
    throw ConfigError("visual batch size and epochs must be positive");
  if (seq_steps <= 0 || seq_batch_windows <= 0)
    throw ConfigError("sequence steps and batch size must be positive");
  if (window <= 0) throw ConfigError("window must be positive");
  if (encoder_layers < 1) throw ConfigError("encoder_layers must be >= 1");
  if (!(default_fps > 0.0)) throw ConfigError("fps must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("threshold must be in [0, 1]");
  if (w_max < 1.0) throw ConfigError("w_max must be >= 1");
  if (focal_gamma < 0.0) throw ConfigError("focal gamma must be >= 0");
  if (alternation != "epoch" && alternation != "batch")
    throw ConfigError("alternation must be epoch or batch");
  if (first_task != "expression" && first_task != "au")
    throw ConfigError("first_task must be expression or au");
  if (alpha_mode != "inverse_frequency" && alpha_mode != "uniform")
    throw ConfigError("alpha_mode must be inverse_frequency or uniform");
  if (au_accuracy != "per_label" && au_accuracy != "exact_match")
    throw ConfigError("au_accuracy must be per_label or exact_match");
  if (dedup != "video" && dedup != "frame")
    throw ConfigError("dedup must be video or frame");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (backbone_channels.size() != 4)
    throw ConfigError("backbone_channels needs exactly 4 widths");
}

nlohmann::json PipelineConfig::snapshot() const {
  nlohmann::json j;
  j["data_dir"] = data_dir.string();
  j["out_dir"] = out_dir.string();
  j["aux_au_dir"] = aux_au_dir.string();
  j["default_fps"] = default_fps;
  j["visual"] = {{"lr", visual_lr},
                 {"momentum", visual_momentum},
                 {"batch_size", visual_batch},
                 {"epochs", visual_epochs},
                 {"alternation", alternation},
                 {"first_task", first_task},
                 {"backbone_channels", backbone_channels},
                 {"augment", augment}};
  j["sequence"] = {{"lr", seq_lr},
                   {"momentum", seq_momentum},
                   {"steps", seq_steps},
                   {"batch_windows", seq_batch_windows},
                   {"window", window},
                   {"encoder_layers", encoder_layers},
                   {"heads", heads},
                   {"ff_dim", ff_dim},
                   {"dropout", dropout},
                   {"positional_encoding", positional_encoding}};
  j["loss"] = {{"focal_gamma", focal_gamma}, {"alpha_mode", alpha_mode}, {"w_max", w_max}};
  j["metrics"] = {{"threshold", threshold},
                  {"degenerate_f1", degenerate_f1},
                  {"au_accuracy", au_accuracy}};
  j["dedup"] = dedup;
  j["seed"] = seed;
  j["workers"] = workers;
  j["clip_norm"] = clip_norm;
  j["synth"] = {{"videos", synth_videos},
                {"frames", synth_frames},
                {"fps", synth_fps},
                {"sample_rate", synth_rate}};
  return j;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    entries[key] = value;
  }
  return entries;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T out{};
  ss >> out;
  if (ss.fail() || !ss.eof())
    throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ','))
    out.push_back(parse_number<int>(key, tok));
  return out;
}

}  // namespace

void apply_config_entries(PipelineConfig& cfg,
                          const std::map<std::string, std::string>& entries) {
  using Setter = std::function<void(PipelineConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"data_dir", [](auto& c, const auto& v) { c.data_dir = v; }},
      {"out_dir", [](auto& c, const auto& v) { c.out_dir = v; }},
      {"aux_au_dir", [](auto& c, const auto& v) { c.aux_au_dir = v; }},
      {"default_fps", [](auto& c, const auto& v) { c.default_fps = parse_number<double>("default_fps", v); }},
      {"visual.lr", [](auto& c, const auto& v) { c.visual_lr = parse_number<float>("visual.lr", v); }},
      {"visual.momentum", [](auto& c, const auto& v) { c.visual_momentum = parse_number<float>("visual.momentum", v); }},
      {"visual.batch_size", [](auto& c, const auto& v) { c.visual_batch = parse_number<int>("visual.batch_size", v); }},
      {"visual.epochs", [](auto& c, const auto& v) { c.visual_epochs = parse_number<int>("visual.epochs", v); }},
      {"visual.alternation", [](auto& c, const auto& v) { c.alternation = v; }},
      {"visual.first_task", [](auto& c, const auto& v) { c.first_task = v; }},
      {"visual.backbone_channels", [](auto& c, const auto& v) { c.backbone_channels = parse_int_list("visual.backbone_channels", v); }},
      {"visual.augment", [](auto& c, const auto& v) { c.augment = parse_bool("visual.augment", v); }},
      {"sequence.lr", [](auto& c, const auto& v) { c.seq_lr = parse_number<float>("sequence.lr", v); }},
      {"sequence.momentum", [](auto& c, const auto& v) { c.seq_momentum = parse_number<float>("sequence.momentum", v); }},
      {"sequence.steps", [](auto& c, const auto& v) { c.seq_steps = parse_number<int>("sequence.steps", v); }},
      {"sequence.batch_windows", [](auto& c, const auto& v) { c.seq_batch_windows = parse_number<int>("sequence.batch_windows", v); }},
      {"sequence.window", [](auto& c, const auto& v) { c.window = parse_number<int>("sequence.window", v); }},
      {"sequence.encoder_layers", [](auto& c, const auto& v) { c.encoder_layers = parse_number<int>("sequence.encoder_layers", v); }},
      {"sequence.heads", [](auto& c, const auto& v) { c.heads = parse_number<int>("sequence.heads", v); }},
      {"sequence.ff_dim", [](auto& c, const auto& v) { c.ff_dim = parse_number<int>("sequence.ff_dim", v); }},
      {"sequence.dropout", [](auto& c, const auto& v) { c.dropout = parse_number<float>("sequence.dropout", v); }},
      {"sequence.positional_encoding", [](auto& c, const auto& v) { c.positional_encoding = parse_bool("sequence.positional_encoding", v); }},
      {"loss.focal_gamma", [](auto& c, const auto& v) { c.focal_gamma = parse_number<double>("loss.focal_gamma", v); }},
      {"loss.alpha_mode", [](auto& c, const auto& v) { c.alpha_mode = v; }},
      {"loss.w_max", [](auto& c, const auto& v) { c.w_max = parse_number<double>("loss.w_max", v); }},
      {"metrics.threshold", [](auto& c, const auto& v) { c.threshold = parse_number<double>("metrics.threshold", v); }},
      {"metrics.degenerate_f1", [](auto& c, const auto& v) { c.degenerate_f1 = parse_number<double>("metrics.degenerate_f1", v); }},
      {"metrics.au_accuracy", [](auto& c, const auto& v) { c.au_accuracy = v; }},
      {"dedup", [](auto& c, const auto& v) { c.dedup = v; }},
      {"seed", [](auto& c, const auto& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"workers", [](auto& c, const auto& v) { c.workers = parse_number<int>("workers", v); }},
      {"clip_norm", [](auto& c, const auto& v) { c.clip_norm = parse_number<float>("clip_norm", v); }},
      {"synth.videos", [](auto& c, const auto& v) { c.synth_videos = parse_number<int>("synth.videos", v); }},
      {"synth.frames", [](auto& c, const auto& v) { c.synth_frames = parse_number<int>("synth.frames", v); }},
      {"synth.fps", [](auto& c, const auto& v) { c.synth_fps = parse_number<double>("synth.fps", v); }},
      {"synth.sample_rate", [](auto& c, const auto& v) { c.synth_rate = parse_number<int>("synth.sample_rate", v); }},
  };
  for (const auto& [key, value] : entries) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key: " + key);
    it->second(cfg, value);
  }
}

}  // namespace affect::pipeline
