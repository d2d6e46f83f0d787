#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "affect/data/types.hpp"
#include "affect/tensor.hpp"

namespace affect::data {

// Planar CHW float image, channels RGB, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<float> chw;

  float at(int c, int y, int x) const {
    return chw[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float& at(int c, int y, int x) {
    return chw[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  static Image blank(int h, int w) {
    Image img;
    img.height = h;
    img.width = w;
    img.chw.assign(static_cast<std::size_t>(3) * h * w, 0.0f);
    return img;
  }
};

Image load_image(const std::filesystem::path& path);
void save_image_jpg(const std::filesystem::path& path, const Image& img, int quality = 95);

// Stacks images into an (N, 3, H, W) tensor.
Tensor images_to_tensor(const std::vector<Image>& images);
Tensor image_to_tensor(const Image& image);

struct Wav {
  std::vector<float> samples;
  int sample_rate = 0;
};

Wav load_wav(const std::filesystem::path& path);
void save_wav(const std::filesystem::path& path, const Wav& wav);

std::vector<float> resample_linear(const std::vector<float>& samples, int from_rate,
                                   int to_rate);

// Ingestion target rate for all audio.
inline constexpr int kAudioRate = 16000;

// Loads the video's audio track resampled to target_rate. Throws DataError if
// the video has no audio path or the file is missing.
AudioTrack load_video_audio(const VideoRecord& video, int target_rate = kAudioRate);

struct VideoMeta {
  double fps = 30.0;
  int frame_count = 0;
};

std::map<std::string, VideoMeta> read_videos_csv(const std::filesystem::path& path);
void write_videos_csv(const std::filesystem::path& path,
                      const std::map<std::string, VideoMeta>& meta);

// Resolves frame paths against frames_dir, attaches audio paths that exist
// under audio_dir, and applies fps / frame counts from the sidecar metadata
// (falling back to default_fps and annotation-derived counts).
void attach_media(DatasetSplit& split, const std::filesystem::path& frames_dir,
                  const std::filesystem::path& audio_dir, double default_fps,
                  const std::map<std::string, VideoMeta>* meta = nullptr);

}  // namespace affect::data
