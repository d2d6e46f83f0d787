#include "affect/data/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "affect/errors.hpp"

namespace affect::data {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> list_txt_files(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw DataError("annotation directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

int parse_int_token(std::string_view tok, const fs::path& file, int line_no) {
  // trim spaces and carriage returns
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
    tok.remove_suffix(1);
  int value = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(file.string(), line_no,
                     "expected integer, got '" + std::string(tok) + "'");
  return value;
}

std::string canonical_frame_name(int frame_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d.jpg", frame_index);
  return buf;
}

struct PendingFrame {
  std::optional<AuVector> au;
  std::optional<int> expr;
};

}  // namespace

DatasetSplit parse_annotations(const fs::path& au_dir, const fs::path& expr_dir,
                               const std::string& split_name) {
  if (au_dir.empty() && expr_dir.empty())
    throw ContractError("parse_annotations needs at least one annotation directory");

  std::map<std::string, std::map<int, PendingFrame>> frames;
  std::map<std::string, int> line_counts;

  if (!au_dir.empty()) {
    for (const auto& file : list_txt_files(au_dir)) {
      const std::string vid = file.stem().string();
      std::ifstream in(file);
      std::string line;
      int line_no = 0;
      while (std::getline(in, line)) {
        const int frame = line_no++;
        std::vector<std::string_view> toks;
        std::string_view rest(line);
        while (true) {
          const auto comma = rest.find(',');
          toks.push_back(rest.substr(0, comma));
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
        if (toks.size() != kNumAus)
          throw ParseError(file.string(), line_no,
                           "expected " + std::to_string(kNumAus) +
                               " comma-separated values, got " +
                               std::to_string(toks.size()));
        AuVector au{};
        bool invalid = false;
        for (int i = 0; i < kNumAus; ++i) {
          const int v = parse_int_token(toks[static_cast<std::size_t>(i)], file, line_no);
          if (v == -1) {
            invalid = true;  // one -1 discards the whole row
          } else if (v == 0 || v == 1) {
            au[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
          } else {
            throw ParseError(file.string(), line_no,
                             "AU value must be -1, 0 or 1, got " + std::to_string(v));
          }
        }
        if (!invalid) frames[vid][frame].au = au;
      }
      auto& count = line_counts[vid];
      count = std::max(count, line_no);
    }
  }

  if (!expr_dir.empty()) {
    for (const auto& file : list_txt_files(expr_dir)) {
      const std::string vid = file.stem().string();
      std::ifstream in(file);
      std::string line;
      int line_no = 0;
      while (std::getline(in, line)) {
        const int frame = line_no++;
        const int v = parse_int_token(line, file, line_no);
        if (v < -1 || v >= kNumExpressions)
          throw ParseError(file.string(), line_no,
                           "expression must be in [-1, 6], got " + std::to_string(v));
        if (v != -1) frames[vid][frame].expr = v;
      }
      auto& count = line_counts[vid];
      count = std::max(count, line_no);
    }
  }

  DatasetSplit split;
  split.name = split_name;
  for (const auto& [vid, by_frame] : frames) {
    bool any = false;
    for (const auto& [frame, pending] : by_frame) {
      if (!pending.au && !pending.expr) continue;
      FrameAnnotation ann;
      ann.video_id = vid;
      ann.frame_index = frame;
      ann.au = pending.au;
      ann.expr = pending.expr;
      split.annotations.push_back(std::move(ann));
      any = true;
    }
    if (!any) continue;
    VideoRecord rec;
    rec.video_id = vid;
    const int n = line_counts[vid];
    rec.frame_paths.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      rec.frame_paths.emplace_back(fs::path(vid) / canonical_frame_name(i));
    split.videos.emplace(vid, std::move(rec));
  }
  return split;
}

void write_annotations(const DatasetSplit& split, const fs::path& au_dir,
                       const fs::path& expr_dir) {
  fs::create_directories(au_dir);
  fs::create_directories(expr_dir);

  std::map<std::string, std::map<int, const FrameAnnotation*>> by_video;
  for (const auto& ann : split.annotations)
    by_video[ann.video_id][ann.frame_index] = &ann;

  for (const auto& [vid, by_frame] : by_video) {
    const int max_frame = by_frame.rbegin()->first;
    bool any_au = false, any_expr = false;
    for (const auto& [_, ann] : by_frame) {
      any_au |= ann->au.has_value();
      any_expr |= ann->expr.has_value();
    }
    if (any_au) {
      std::ofstream out(au_dir / (vid + ".txt"));
      for (int f = 0; f <= max_frame; ++f) {
        const auto it = by_frame.find(f);
        const bool has = it != by_frame.end() && it->second->au.has_value();
        for (int i = 0; i < kNumAus; ++i) {
          if (i) out << ',';
          out << (has ? static_cast<int>((*it->second->au)[static_cast<std::size_t>(i)]) : -1);
        }
        out << '\n';
      }
    }
    if (any_expr) {
      std::ofstream out(expr_dir / (vid + ".txt"));
      for (int f = 0; f <= max_frame; ++f) {
        const auto it = by_frame.find(f);
        const bool has = it != by_frame.end() && it->second->expr.has_value();
        out << (has ? *it->second->expr : -1) << '\n';
      }
    }
  }
}

namespace {

DatasetSplit rebuild_with(const DatasetSplit& src,
                          std::vector<FrameAnnotation> annotations) {
  DatasetSplit out;
  out.name = src.name;
  out.annotations = std::move(annotations);
  std::set<std::string> used;
  for (const auto& ann : out.annotations) used.insert(ann.video_id);
  for (const auto& vid : used) {
    const auto it = src.videos.find(vid);
    if (it != src.videos.end()) out.videos.emplace(vid, it->second);
  }
  return out;
}

}  // namespace

DedupReport deduplicate_validation(const DatasetSplit& au_train,
                                   const DatasetSplit& au_val,
                                   const DatasetSplit& expr_train,
                                   const DatasetSplit& expr_val,
                                   DedupGranularity granularity) {
  const auto filter = [granularity](const DatasetSplit& val, const DatasetSplit& other_train,
                                    int& removed, std::vector<std::string>& removed_videos) {
    std::set<std::string> train_videos;
    std::set<std::pair<std::string, int>> train_frames;
    for (const auto& ann : other_train.annotations) {
      train_videos.insert(ann.video_id);
      train_frames.emplace(ann.video_id, ann.frame_index);
    }
    std::set<std::string> dropped_videos;
    std::vector<FrameAnnotation> kept;
    kept.reserve(val.annotations.size());
    for (const auto& ann : val.annotations) {
      const bool drop =
          granularity == DedupGranularity::video
              ? train_videos.count(ann.video_id) > 0
              : train_frames.count({ann.video_id, ann.frame_index}) > 0;
      if (drop) {
        ++removed;
        if (granularity == DedupGranularity::video) dropped_videos.insert(ann.video_id);
      } else {
        kept.push_back(ann);
      }
    }
    removed_videos.assign(dropped_videos.begin(), dropped_videos.end());
    return rebuild_with(val, std::move(kept));
  };

  DedupReport report;
  report.au_val = filter(au_val, expr_train, report.au_removed_annotations,
                         report.au_removed_videos);
  report.expr_val = filter(expr_val, au_train, report.expr_removed_annotations,
                           report.expr_removed_videos);
  return report;
}

FilterResult filter_missing_crops(const DatasetSplit& split) {
  FilterResult result;
  std::vector<FrameAnnotation> kept;
  kept.reserve(split.annotations.size());
  for (const auto& ann : split.annotations) {
    const auto vit = split.videos.find(ann.video_id);
    if (vit == split.videos.end()) {
      ++result.removed;
      continue;
    }
    const auto& paths = vit->second.frame_paths;
    const auto idx = static_cast<std::size_t>(ann.frame_index);
    if (idx < paths.size() && fs::exists(paths[idx]))
      kept.push_back(ann);
    else
      ++result.removed;
  }
  result.split = rebuild_with(split, std::move(kept));
  return result;
}

BalanceStats compute_balance_stats(const DatasetSplit& split) {
  BalanceStats stats;
  for (const auto& ann : split.annotations) {
    if (ann.au) {
      for (int i = 0; i < kNumAus; ++i) {
        if ((*ann.au)[static_cast<std::size_t>(i)])
          ++stats.au_positive_counts[static_cast<std::size_t>(i)];
        else
          ++stats.au_negative_counts[static_cast<std::size_t>(i)];
      }
    }
    if (ann.expr) ++stats.expr_counts[static_cast<std::size_t>(*ann.expr)];
  }
  return stats;
}

Eigen::VectorXd positive_weights(const BalanceStats& stats, double w_max) {
  if (w_max < 1.0) throw ContractError("positive_weights requires w_max >= 1");
  Eigen::VectorXd w(kNumAus);
  for (int i = 0; i < kNumAus; ++i) {
    const auto pos = stats.au_positive_counts[static_cast<std::size_t>(i)];
    const auto neg = stats.au_negative_counts[static_cast<std::size_t>(i)];
    const double ratio =
        static_cast<double>(neg) / static_cast<double>(std::max<std::int64_t>(pos, 1));
    w[i] = std::clamp(ratio, 1.0, w_max);
  }
  return w;
}

DatasetSplit merge_auxiliary_au(const DatasetSplit& main, const DatasetSplit& aux) {
  DatasetSplit out = main;
  for (const auto& ann : aux.annotations) {
    if (ann.expr)
      throw ContractError("auxiliary split must carry AU labels only (video " +
                          ann.video_id + ", frame " + std::to_string(ann.frame_index) + ")");
    if (!ann.au)
      throw ContractError("auxiliary annotation without AU label (video " + ann.video_id + ")");
  }
  for (const auto& [vid, rec] : aux.videos) {
    const std::string new_id = "aux/" + vid;
    if (out.videos.count(new_id))
      throw ContractError("auxiliary video id collides after namespacing: " + new_id);
    VideoRecord renamed = rec;
    renamed.video_id = new_id;
    out.videos.emplace(new_id, std::move(renamed));
  }
  for (const auto& ann : aux.annotations) {
    FrameAnnotation renamed = ann;
    renamed.video_id = "aux/" + ann.video_id;
    out.annotations.push_back(std::move(renamed));
  }
  return out;
}

void validate_split(const DatasetSplit& split) {
  if (split.name != "train" && split.name != "val")
    throw ContractError("split name must be train or val, got '" + split.name + "'");
  for (const auto& [vid, rec] : split.videos) {
    if (rec.video_id != vid) throw ContractError("video record id mismatch: " + vid);
    if (!(rec.fps > 0.0)) throw ContractError("fps must be positive for video " + vid);
  }
  for (const auto& ann : split.annotations) {
    const auto vit = split.videos.find(ann.video_id);
    if (vit == split.videos.end())
      throw ContractError("annotation references unknown video " + ann.video_id);
    if (ann.frame_index < 0 || ann.frame_index >= vit->second.frame_count())
      throw ContractError("frame index out of range for video " + ann.video_id + ": " +
                          std::to_string(ann.frame_index));
    if (!ann.au && !ann.expr)
      throw ContractError("annotation with neither AU nor expression label (video " +
                          ann.video_id + ")");
    if (ann.au)
      for (const auto v : *ann.au)
        if (v != 0 && v != 1) throw ContractError("AU labels must be 0/1");
    if (ann.expr && (*ann.expr < 0 || *ann.expr >= kNumExpressions))
      throw ContractError("expression label out of range");
  }
}

void write_stats_csv(const BalanceStats& stats, const fs::path& au_csv,
                     const fs::path& expr_csv) {
  {
    std::ofstream out(au_csv);
    out << "label,positive,negative\n";
    for (int i = 0; i < kNumAus; ++i)
      out << "AU" << kAuNumbers[static_cast<std::size_t>(i)] << ','
          << stats.au_positive_counts[static_cast<std::size_t>(i)] << ','
          << stats.au_negative_counts[static_cast<std::size_t>(i)] << '\n';
  }
  {
    std::ofstream out(expr_csv);
    out << "class,count\n";
    for (int i = 0; i < kNumExpressions; ++i)
      out << i << ',' << stats.expr_counts[static_cast<std::size_t>(i)] << '\n';
  }
}

}  // namespace affect::data
