#include "affect/data/synthetic.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include "affect/color.hpp"
#include "affect/data/annotations.hpp"
#include "affect/data/media.hpp"
#include "affect/errors.hpp"
#include "affect/rng.hpp"

namespace affect::data {

namespace fs = std::filesystem;

namespace {

constexpr float kPatchSize = 16.0f;

struct SegmentLabels {
  AuVector au{};
  int expr = 0;
};

// Patch anchors live inside the region that survives the training-time crop
// (offsets up to 12 px at crop size 100).
void patch_origin(int au_index, int& x, int& y) {
  x = 16 + (au_index % 4) * 22;
  y = 16 + (au_index / 4) * 26;
}

Rgb au_patch_color(int au_index) {
  return hsl_to_rgb({(au_index + 0.5f) / static_cast<float>(kNumAus), 0.95f, 0.30f});
}

Rgb expr_background_color(int expr) {
  return hsl_to_rgb({expr / static_cast<float>(kNumExpressions), 0.40f, 0.72f});
}

double au_tone_hz(int au_index) { return 500.0 + 120.0 * au_index; }
double expr_tone_hz(int expr) { return 3000.0 + 150.0 * expr; }

Image render_frame(const SegmentLabels& labels, int size, Rng& rng) {
  Image img = Image::blank(size, size);
  const Rgb bg = expr_background_color(labels.expr);
  const float brightness = rng.uniform(-0.03f, 0.03f);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      img.at(0, y, x) = bg.r + brightness;
      img.at(1, y, x) = bg.g + brightness;
      img.at(2, y, x) = bg.b + brightness;
    }
  }
  for (int i = 0; i < kNumAus; ++i) {
    if (!labels.au[static_cast<std::size_t>(i)]) continue;
    int px, py;
    patch_origin(i, px, py);
    const Rgb c = au_patch_color(i);
    const int sz = static_cast<int>(kPatchSize);
    for (int y = py; y < py + sz; ++y) {
      for (int x = px; x < px + sz; ++x) {
        img.at(0, y, x) = c.r;
        img.at(1, y, x) = c.g;
        img.at(2, y, x) = c.b;
      }
    }
  }
  for (auto& v : img.chw) v = std::clamp(v + rng.normal(0.0f, 0.015f), 0.0f, 1.0f);
  return img;
}

std::vector<float> render_audio(const std::vector<SegmentLabels>& segments,
                                const SyntheticConfig& cfg, Rng& rng) {
  const double duration = cfg.frames_per_video / cfg.fps;
  const auto n = static_cast<std::size_t>(std::llround(duration * cfg.sample_rate));
  std::vector<float> samples(n, 0.0f);
  constexpr double kTau = 2.0 * std::numbers::pi;
  for (std::size_t s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) / cfg.sample_rate;
    int frame = static_cast<int>(t * cfg.fps);
    frame = std::min(frame, cfg.frames_per_video - 1);
    const auto& seg = segments[static_cast<std::size_t>(frame / cfg.segment_frames)];
    double v = 0.20 * std::sin(kTau * expr_tone_hz(seg.expr) * t);
    for (int i = 0; i < kNumAus; ++i)
      if (seg.au[static_cast<std::size_t>(i)]) v += 0.12 * std::sin(kTau * au_tone_hz(i) * t);
    samples[s] = static_cast<float>(v) + rng.normal(0.0f, 0.005f);
  }
  for (auto& v : samples) v = std::clamp(v, -1.0f, 1.0f);
  return samples;
}

struct GeneratedVideo {
  std::string video_id;
  std::vector<SegmentLabels> segments;
};

GeneratedVideo generate_video(const SyntheticConfig& cfg, const std::string& video_id,
                              std::uint64_t video_seed, const fs::path& out_dir) {
  Rng rng(video_seed);
  GeneratedVideo out;
  out.video_id = video_id;

  const int n_segments = (cfg.frames_per_video + cfg.segment_frames - 1) / cfg.segment_frames;
  out.segments.reserve(static_cast<std::size_t>(n_segments));
  for (int s = 0; s < n_segments; ++s) {
    SegmentLabels seg;
    for (int i = 0; i < kNumAus; ++i)
      seg.au[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
    seg.expr = rng.uniform_int(0, kNumExpressions - 1);
    out.segments.push_back(seg);
  }

  for (int f = 0; f < cfg.frames_per_video; ++f) {
    const auto& seg = out.segments[static_cast<std::size_t>(f / cfg.segment_frames)];
    const Image img = render_frame(seg, cfg.image_size, rng);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d.jpg", f);
    save_image_jpg(out_dir / "frames" / video_id / buf, img, cfg.jpeg_quality);
  }

  Wav wav;
  wav.sample_rate = cfg.sample_rate;
  wav.samples = render_audio(out.segments, cfg, rng);
  save_wav(out_dir / "audio" / (video_id + ".wav"), wav);
  return out;
}

void write_labels(const SyntheticConfig& cfg, const GeneratedVideo& video,
                  const fs::path& au_dir, const fs::path& expr_dir) {
  fs::create_directories(au_dir);
  fs::create_directories(expr_dir);
  std::ofstream au_out(au_dir / (video.video_id + ".txt"));
  std::ofstream expr_out(expr_dir / (video.video_id + ".txt"));
  for (int f = 0; f < cfg.frames_per_video; ++f) {
    const auto& seg = video.segments[static_cast<std::size_t>(f / cfg.segment_frames)];
    for (int i = 0; i < kNumAus; ++i) {
      if (i) au_out << ',';
      au_out << static_cast<int>(seg.au[static_cast<std::size_t>(i)]);
    }
    au_out << '\n';
    expr_out << seg.expr << '\n';
  }
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_videos <= 0 || frames_per_video <= 0 || sample_rate <= 0 || segment_frames <= 0 ||
      !(fps > 0.0))
    throw ConfigError("synthetic config values must be positive");
}

int synthetic_val_count(int n_videos) {
  if (n_videos < 2) return 0;
  return std::max(1, n_videos / 3);
}

SyntheticDataset generate_synthetic_dataset(const SyntheticConfig& config,
                                            std::uint64_t seed, const fs::path& out_dir,
                                            int workers) {
  config.validate();
  fs::create_directories(out_dir);

  const int n_val = synthetic_val_count(config.n_videos);
  const int n_train = config.n_videos - n_val;

  struct Job {
    std::string video_id;
    std::string split;  // train | val
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(config.n_videos));
  for (int i = 0; i < config.n_videos; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "synth%03d", i);
    jobs.push_back({buf, i < n_train ? "train" : "val", Rng::mix(seed, static_cast<std::uint64_t>(i))});
  }

  std::vector<GeneratedVideo> generated(jobs.size());
  const int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      generated[i] = generate_video(config, jobs[i].video_id, jobs[i].seed, out_dir);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          generated[i] = generate_video(config, jobs[i].video_id, jobs[i].seed, out_dir);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  std::map<std::string, VideoMeta> meta;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    write_labels(config, generated[i], out_dir / "au" / jobs[i].split,
                 out_dir / "expr" / jobs[i].split);
    meta[jobs[i].video_id] = VideoMeta{config.fps, config.frames_per_video};
  }
  write_videos_csv(out_dir / "videos.csv", meta);

  SyntheticDataset result;
  result.train = parse_annotations(out_dir / "au" / "train", out_dir / "expr" / "train", "train");
  result.val = parse_annotations(out_dir / "au" / "val", out_dir / "expr" / "val", "val");
  for (auto* split : {&result.train, &result.val})
    attach_media(*split, out_dir / "frames", out_dir / "audio", config.fps, &meta);
  return result;
}

}  // namespace affect::data
