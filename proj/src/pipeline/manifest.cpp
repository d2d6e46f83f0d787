#include "affect/pipeline/manifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "affect/errors.hpp"
#include "affect/hash.hpp"

namespace affect::pipeline {

namespace fs = std::filesystem;

DirLock::DirLock(const fs::path& dir) {
  fs::create_directories(dir);
  path_ = dir / ".lock";
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0)
    throw DataError("output directory is locked by another run: " + dir.string() +
                    " (remove " + path_.string() + " if stale)");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
  owned_ = true;
}

DirLock::~DirLock() {
  if (owned_) {
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

RunManifest::RunManifest(fs::path out_dir)
    : out_dir_(std::move(out_dir)), root_(std::make_unique<nlohmann::json>()) {
  const fs::path file = out_dir_ / "manifest.json";
  if (fs::exists(file)) {
    std::ifstream in(file);
    try {
      in >> *root_;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corrupt manifest: " + file.string() + ": " + e.what());
    }
  } else {
    *root_ = nlohmann::json::object();
  }
  if (!root_->contains("files")) (*root_)["files"] = nlohmann::json::object();
  if (!root_->contains("inputs")) (*root_)["inputs"] = nlohmann::json::object();
  if (!root_->contains("stages")) (*root_)["stages"] = nlohmann::json::object();
}

RunManifest::~RunManifest() = default;
RunManifest::RunManifest(RunManifest&&) noexcept = default;

void RunManifest::set_config(const nlohmann::json& snapshot) {
  (*root_)["config"] = snapshot;
}

void RunManifest::record_input(const std::string& name, const std::string& digest) {
  (*root_)["inputs"][name] = digest;
}

void RunManifest::record_file(const fs::path& file) {
  const fs::path rel = fs::relative(file, out_dir_);
  (*root_)["files"][rel.generic_string()] = sha256_file(file);
}

void RunManifest::set_stage(const std::string& stage, const nlohmann::json& info) {
  (*root_)["stages"][stage] = info;
}

void RunManifest::save() const {
  std::ofstream out(out_dir_ / "manifest.json");
  out << root_->dump(1) << '\n';
}

const nlohmann::json& RunManifest::root() const { return *root_; }

std::string hash_directory(const fs::path& dir) {
  if (!fs::exists(dir)) return "absent";
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& f : files) {
    listing += fs::relative(f, dir).generic_string();
    listing += ':';
    listing += sha256_file(f);
    listing += '\n';
  }
  return sha256_hex(listing);
}

}  // namespace affect::pipeline
