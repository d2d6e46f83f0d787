#pragma once

#include <filesystem>

#include "affect/data/types.hpp"

namespace affect::data {

// Prepared-split manifest: annotations plus enough video metadata (fps,
// frame directory, audio path, frame count) to rebuild the records. Frame
// files follow the canonical <dir>/<index:05>.jpg naming.
void save_split_json(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit load_split_json(const std::filesystem::path& path);

}  // namespace affect::data
