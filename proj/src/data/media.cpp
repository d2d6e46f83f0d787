#include "affect/data/media.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "affect/errors.hpp"

namespace affect::data {

namespace fs = std::filesystem;

Image load_image(const fs::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot read image: " + path.string());
  Image img;
  img.height = bgr.rows;
  img.width = bgr.cols;
  img.chw.resize(static_cast<std::size_t>(3) * bgr.rows * bgr.cols);
  constexpr float kInv255 = 1.0f / 255.0f;
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(0, y, x) = row[x][2] * kInv255;  // R
      img.at(1, y, x) = row[x][1] * kInv255;  // G
      img.at(2, y, x) = row[x][0] * kInv255;  // B
    }
  }
  return img;
}

void save_image_jpg(const fs::path& path, const Image& img, int quality) {
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width; ++x) {
      const auto to_u8 = [](float v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
      };
      row[x][2] = to_u8(img.at(0, y, x));
      row[x][1] = to_u8(img.at(1, y, x));
      row[x][0] = to_u8(img.at(2, y, x));
    }
  }
  fs::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr, {cv::IMWRITE_JPEG_QUALITY, quality}))
    throw DataError("cannot write image: " + path.string());
}

Tensor images_to_tensor(const std::vector<Image>& images) {
  if (images.empty()) throw ContractError("images_to_tensor: empty batch");
  const int h = images[0].height, w = images[0].width;
  Tensor t({static_cast<int>(images.size()), 3, h, w});
  float* dst = t.data();
  for (const auto& img : images) {
    if (img.height != h || img.width != w)
      throw ContractError("images_to_tensor: inconsistent image sizes");
    std::memcpy(dst, img.chw.data(), img.chw.size() * sizeof(float));
    dst += img.chw.size();
  }
  return t;
}

Tensor image_to_tensor(const Image& image) { return images_to_tensor({image}); }

// ---------------------------------------------------------------- WAV

namespace {

struct WavHeaderFields {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

template <typename T>
T read_le(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

Wav load_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav: " + path.string());

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw DataError("not a RIFF file: " + path.string());
  read_le<std::uint32_t>(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw DataError("not a WAVE file: " + path.string());

  WavHeaderFields hdr;
  std::vector<std::int16_t> pcm;
  bool got_fmt = false, got_data = false;
  while (in.read(tag, 4)) {
    const auto chunk_size = read_le<std::uint32_t>(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      hdr.format = read_le<std::uint16_t>(in);
      hdr.channels = read_le<std::uint16_t>(in);
      hdr.sample_rate = read_le<std::uint32_t>(in);
      read_le<std::uint32_t>(in);  // byte rate
      read_le<std::uint16_t>(in);  // block align
      hdr.bits = read_le<std::uint16_t>(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      got_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!got_fmt) throw DataError("wav data before fmt chunk: " + path.string());
      pcm.resize(chunk_size / sizeof(std::int16_t));
      in.read(reinterpret_cast<char*>(pcm.data()),
              static_cast<std::streamsize>(pcm.size() * sizeof(std::int16_t)));
      got_data = true;
      break;
    } else {
      in.seekg(chunk_size + (chunk_size & 1u), std::ios::cur);
    }
  }
  if (!got_data) throw DataError("wav has no data chunk: " + path.string());
  if (hdr.format != 1 || hdr.bits != 16)
    throw DataError("only 16-bit PCM wav supported: " + path.string());
  if (hdr.channels == 0) throw DataError("wav with zero channels: " + path.string());

  Wav wav;
  wav.sample_rate = static_cast<int>(hdr.sample_rate);
  const std::size_t frames = pcm.size() / hdr.channels;
  wav.samples.resize(frames);
  constexpr float kScale = 1.0f / 32768.0f;
  for (std::size_t i = 0; i < frames; ++i) {
    // downmix by averaging channels
    float acc = 0.0f;
    for (int c = 0; c < hdr.channels; ++c) acc += pcm[i * hdr.channels + c];
    wav.samples[i] = acc * kScale / static_cast<float>(hdr.channels);
  }
  return wav;
}

void save_wav(const fs::path& path, const Wav& wav) {
  if (wav.sample_rate <= 0) throw ContractError("save_wav: sample_rate must be positive");
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write wav: " + path.string());

  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(wav.samples.size() * sizeof(std::int16_t));
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, 1);  // PCM
  write_le<std::uint16_t>(out, 1);  // mono
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(wav.sample_rate));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(wav.sample_rate) * 2);
  write_le<std::uint16_t>(out, 2);
  write_le<std::uint16_t>(out, 16);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_bytes);
  for (const float s : wav.samples) {
    const float clamped = std::clamp(s, -1.0f, 1.0f);
    write_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(clamped * 32767.0f)));
  }
}

std::vector<float> resample_linear(const std::vector<float>& samples, int from_rate,
                                   int to_rate) {
  if (from_rate <= 0 || to_rate <= 0)
    throw ContractError("resample rates must be positive");
  if (from_rate == to_rate || samples.empty()) return samples;
  const std::size_t out_len = static_cast<std::size_t>(
      static_cast<double>(samples.size()) * to_rate / from_rate);
  std::vector<float> out(out_len);
  const double step = static_cast<double>(from_rate) / to_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = i * step;
    const auto i0 = static_cast<std::size_t>(pos);
    const auto i1 = std::min(i0 + 1, samples.size() - 1);
    const float frac = static_cast<float>(pos - static_cast<double>(i0));
    out[i] = samples[i0] * (1.0f - frac) + samples[i1] * frac;
  }
  return out;
}

AudioTrack load_video_audio(const VideoRecord& video, int target_rate) {
  if (!video.has_audio())
    throw DataError("video has no audio track: " + video.video_id);
  const Wav wav = load_wav(video.audio_path);
  AudioTrack track;
  track.sample_rate = target_rate;
  track.samples = resample_linear(wav.samples, wav.sample_rate, target_rate);
  if (track.samples.empty()) throw DataError("empty audio track: " + video.video_id);
  return track;
}

// ---------------------------------------------------------------- sidecar

std::map<std::string, VideoMeta> read_videos_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read: " + path.string());
  std::map<std::string, VideoMeta> meta;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string vid, fps_str, count_str;
    if (!std::getline(ss, vid, ',') || !std::getline(ss, fps_str, ',') ||
        !std::getline(ss, count_str))
      throw ParseError(path.string(), line_no, "expected video_id,fps,frame_count");
    try {
      meta[vid] = VideoMeta{std::stod(fps_str), std::stoi(count_str)};
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "bad numeric field");
    }
  }
  return meta;
}

void write_videos_csv(const fs::path& path,
                      const std::map<std::string, VideoMeta>& meta) {
  std::ofstream out(path);
  out << "video_id,fps,frame_count\n";
  for (const auto& [vid, m] : meta) out << vid << ',' << m.fps << ',' << m.frame_count << '\n';
}

void attach_media(DatasetSplit& split, const fs::path& frames_dir,
                  const fs::path& audio_dir, double default_fps,
                  const std::map<std::string, VideoMeta>* meta) {
  for (auto& [vid, rec] : split.videos) {
    double fps = default_fps;
    int frame_count = rec.frame_count();
    if (meta) {
      const auto it = meta->find(vid);
      if (it != meta->end()) {
        fps = it->second.fps;
        frame_count = std::max(frame_count, it->second.frame_count);
      }
    }
    rec.fps = fps;
    rec.frame_paths.clear();
    rec.frame_paths.reserve(static_cast<std::size_t>(frame_count));
    for (int i = 0; i < frame_count; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%05d.jpg", i);
      rec.frame_paths.emplace_back(frames_dir / vid / buf);
    }
    const fs::path wav = audio_dir / (vid + ".wav");
    rec.audio_path = fs::exists(wav) ? wav : fs::path();
  }
}

}  // namespace affect::data
