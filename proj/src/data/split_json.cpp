#include "affect/data/split_json.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "affect/errors.hpp"

namespace affect::data {

namespace fs = std::filesystem;
using nlohmann::json;

void save_split_json(const DatasetSplit& split, const fs::path& path) {
  json j;
  j["name"] = split.name;
  json videos = json::object();
  for (const auto& [vid, rec] : split.videos) {
    json v;
    v["fps"] = rec.fps;
    v["frame_count"] = rec.frame_count();
    v["frames_dir"] =
        rec.frame_paths.empty() ? "" : rec.frame_paths.front().parent_path().string();
    v["audio"] = rec.audio_path.string();
    videos[vid] = std::move(v);
  }
  j["videos"] = std::move(videos);
  json anns = json::array();
  for (const auto& ann : split.annotations) {
    json a;
    a["v"] = ann.video_id;
    a["f"] = ann.frame_index;
    if (ann.au) {
      json row = json::array();
      for (const auto b : *ann.au) row.push_back(static_cast<int>(b));
      a["au"] = std::move(row);
    }
    if (ann.expr) a["e"] = *ann.expr;
    anns.push_back(std::move(a));
  }
  j["annotations"] = std::move(anns);
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(1) << '\n';
}

DatasetSplit load_split_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prepared split: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bad split manifest " + path.string() + ": " + e.what());
  }
  DatasetSplit split;
  split.name = j.at("name").get<std::string>();
  for (const auto& [vid, v] : j.at("videos").items()) {
    VideoRecord rec;
    rec.video_id = vid;
    rec.fps = v.at("fps").get<double>();
    const int count = v.at("frame_count").get<int>();
    const fs::path dir = v.at("frames_dir").get<std::string>();
    rec.frame_paths.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%05d.jpg", i);
      rec.frame_paths.emplace_back(dir / buf);
    }
    const std::string audio = v.at("audio").get<std::string>();
    rec.audio_path = audio.empty() ? fs::path() : fs::path(audio);
    split.videos.emplace(vid, std::move(rec));
  }
  for (const auto& a : j.at("annotations")) {
    FrameAnnotation ann;
    ann.video_id = a.at("v").get<std::string>();
    ann.frame_index = a.at("f").get<int>();
    if (a.contains("au")) {
      AuVector au{};
      const auto& row = a.at("au");
      for (int i = 0; i < kNumAus; ++i)
        au[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(row.at(static_cast<std::size_t>(i)).get<int>());
      ann.au = au;
    }
    if (a.contains("e")) ann.expr = a.at("e").get<int>();
    split.annotations.push_back(std::move(ann));
  }
  return split;
}

}  // namespace affect::data
