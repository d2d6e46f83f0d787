#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace affect {

// Hex-encoded SHA-256 digests, used for run manifests and freeze checks.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace affect
