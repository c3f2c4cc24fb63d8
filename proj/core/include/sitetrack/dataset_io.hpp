#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sitetrack/sim.hpp"

namespace sitetrack {

/// Writes meta.json, frames.jsonl and groundtruth.jsonl into the directory.
/// The field layout is pinned by docs/dataset_format.md (format version 1).
void export_dataset(const SimulatedDataset& dataset, const std::filesystem::path& dir);

/// Lossless inverse of export_dataset. Throws IoError on missing files and
/// FormatError (naming file and line) on malformed records.
SimulatedDataset import_dataset(const std::filesystem::path& dir);

std::string descriptor_to_hex(const Descriptor& d);
Descriptor descriptor_from_hex(std::string_view hex);  // throws FormatError

}  // namespace sitetrack
