#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcattn/numerics/value.hpp"

namespace pcattn::framework {

struct CheckpointEntry {
  std::string name;
  numerics::Shape shape;
  std::vector<double> data;

  bool operator==(const CheckpointEntry&) const = default;
};

struct Checkpoint {
  /// Free-form text stored alongside the weights (the experiment config).
  std::string metadata;
  std::vector<CheckpointEntry> entries;

  bool operator==(const Checkpoint&) const = default;
};

// Little-endian: "PCKP", u32 version, u32 metadata length + bytes, u32 entry
// count, then per entry u32 name length + name, u32 rank, rank x u64 dims,
// f64 payload; trailing u64 FNV-1a hash of everything before it.
std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on malformed input.
Checkpoint decode_checkpoint(std::string_view bytes);

Checkpoint snapshot(const std::vector<std::pair<std::string, numerics::Value>>& params, std::string metadata = "");
/// Copies weights into `params` by name. Throws CompatibilityError when a
/// name is missing on either side or a shape differs.
void restore(const Checkpoint& ckpt, const std::vector<std::pair<std::string, numerics::Value>>& params);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pcattn::framework
