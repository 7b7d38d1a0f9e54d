#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pcattn::cli {

inline constexpr std::size_t kMaxSweepRows = 10000;

/// Expands a JSON template into the cross product of its array-valued
/// leaves, first axis slowest. Keys whose values are lists (aggregation,
/// scales, seg_levels, augment) only sweep when given an array of arrays.
/// Throws ConfigError above `cap` rows.
std::vector<std::string> expand_sweep(std::string_view template_json, std::size_t cap = kMaxSweepRows);

/// Expands either one template object or an array of templates (rows
/// concatenated in order).
std::vector<std::string> expand_sweeps(std::string_view json_text, std::size_t cap = kMaxSweepRows);

/// Built-in attention sweeps: "locality" (neighbor basis, scales and key
/// mode), "aggregation" (every method against every aggregation set) and
/// "position-encoding" (encodings on the main global and local methods).
/// Throws ConfigError for other names.
std::vector<std::string> builtin_sweep(std::string_view name);

/// Names accepted by builtin_sweep, in a fixed order.
const std::vector<std::string>& builtin_sweep_names();

}  // namespace pcattn::cli
