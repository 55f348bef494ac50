#pragma once

#include <filesystem>

#include <json.hpp>

#include "kgalign/autodiff.hpp"

namespace kgalign {

/// Binary tensor container:
///   magic "WOGC", version u16, then one record per tensor:
///   u32 name length, UTF-8 name, u32 rank, rank u64 dims,
///   row-major little-endian f64 payload.
/// A sidecar JSON file (same path + ".json") carries run metadata.
void save_checkpoint(const std::filesystem::path& file,
                     const ParameterSet& params,
                     const nlohmann::json& metadata);

ParameterSet load_checkpoint(const std::filesystem::path& file);
nlohmann::json load_checkpoint_meta(const std::filesystem::path& file);

}  // namespace kgalign
