#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pcattn/attention/config.hpp"
#include "pcattn/framework/model.hpp"
#include "pcattn/framework/optim.hpp"
#include "pcattn/pcio/point_cloud.hpp"
#include "pcattn/task.hpp"

namespace pcattn::cli {

inline constexpr int kSchemaVersion = 1;

struct SyntheticSpec {
  std::size_t samples = 32;
  std::size_t points = 256;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticSpec&) const = default;
};

/// Training data comes from a PCB file when `pcb` is set, otherwise from the
/// synthetic generator.
struct DataConfig {
  std::optional<std::string> pcb;
  SyntheticSpec synthetic;
  std::optional<std::string> validation_pcb;

  bool operator==(const DataConfig&) const = default;
};

struct ExperimentConfig {
  Task task = Task::classification;
  framework::ModelConfig model;
  framework::TrainConfig train;
  DataConfig data;
  std::string output_dir = "out";
  /// When set, model.attention is exactly the preset's module.
  std::optional<std::string> preset;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a JSON experiment document, filling defaults.
/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(std::string_view text);

/// Pretty JSON that parse_config maps back to an equal config.
std::string serialize_config(const ExperimentConfig& cfg);

/// Attention object as used under model.attention. Missing keys take the
/// AttentionConfig defaults; dim/ffn_hidden are accepted here too.
attention::AttentionConfig parse_attention(std::string_view json_text);

/// Compact JSON with every field in a fixed order.
std::string canonical_attention(const attention::AttentionConfig& cfg);

/// FNV-1a 64 of canonical_attention, as 16 hex digits.
std::string config_hash(const attention::AttentionConfig& cfg);

std::string_view to_string(Task task);
Task parse_task(std::string_view s);

/// Reads or generates the training set (or the validation set) of a config.
pcio::Dataset load_training_data(const ExperimentConfig& cfg);
std::optional<pcio::Dataset> load_validation_data(const ExperimentConfig& cfg);

}  // namespace pcattn::cli
