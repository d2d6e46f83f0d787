#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "affect/tensor.hpp"

namespace affect {

// Versioned on-disk container: JSON metadata plus an ordered list of named
// float tensors. Save/load/save is byte-identical because entry order is
// preserved and the metadata dump is canonical.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  Checkpoint();
  ~Checkpoint();
  Checkpoint(Checkpoint&&) noexcept;
  Checkpoint& operator=(Checkpoint&&) noexcept;
  Checkpoint(const Checkpoint&) = delete;
  Checkpoint& operator=(const Checkpoint&) = delete;

  nlohmann::json& meta();
  const nlohmann::json& meta() const;

  void add(const std::string& name, const Tensor& t);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

 private:
  std::unique_ptr<nlohmann::json> meta_;
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace affect
