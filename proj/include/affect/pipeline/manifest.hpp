#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace affect::pipeline {

// Exclusive ownership of a run directory via an O_EXCL lock file.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
  bool owned_ = false;
};

// manifest.json in the run directory: config snapshot, input digests, stage
// records, and a content hash for every emitted file. No timestamps, so
// reruns with identical inputs produce identical manifests.
class RunManifest {
 public:
  explicit RunManifest(std::filesystem::path out_dir);
  ~RunManifest();
  RunManifest(RunManifest&&) noexcept;

  void set_config(const nlohmann::json& snapshot);
  void record_input(const std::string& name, const std::string& digest);
  // file must live under the run directory; stored by relative path
  void record_file(const std::filesystem::path& file);
  void set_stage(const std::string& stage, const nlohmann::json& info);
  void save() const;

  const nlohmann::json& root() const;

 private:
  std::filesystem::path out_dir_;
  std::unique_ptr<nlohmann::json> root_;
};

// Digest of a directory tree: sha256 over the sorted list of
// (relative path, file sha256) pairs.
std::string hash_directory(const std::filesystem::path& dir);

}  // namespace affect::pipeline
