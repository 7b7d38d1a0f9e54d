#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pcattn/attention/block.hpp"
#include "pcattn/attention/config.hpp"
#include "pcattn/attention/params.hpp"
#include "pcattn/pcio/point_cloud.hpp"
#include "pcattn/task.hpp"

namespace pcattn::framework {

using attention::AttentionConfig;
using attention::AttentionParams;
using numerics::LinearParams;
using numerics::Value;

struct ModelConfig {
  Task task = Task::classification;
  /// Width d and FFN width live here too.
  AttentionConfig attention;
  /// Attention blocks in the classification network. The segmentation
  /// network always has one block per resolution (seg_levels.size() + 1).
  std::size_t blocks = 4;
  std::size_t n_classes = 4;
  std::size_t n_parts = 2;
  /// Downsampling ratio of each encoder level in the segmentation network.
  std::vector<std::size_t> seg_levels{2, 2};
  std::size_t embed_hidden = 64;
  std::size_t head_hidden = 256;

  bool operator==(const ModelConfig&) const = default;
};

/// Throws ConfigError on an invalid configuration.
void validate(const ModelConfig& cfg);

struct Model {
  ModelConfig config;
  LinearParams embed1;
  LinearParams embed2;
  std::vector<AttentionParams> blocks;
  /// Segmentation only: linear 2d -> d merging upsampled and skip features,
  /// one per decoder level (coarse to fine).
  std::vector<LinearParams> fuse;
  LinearParams head1;
  LinearParams head2;
};

Model make_model(const ModelConfig& cfg, std::uint64_t seed);

std::size_t block_count(const ModelConfig& cfg);

/// All learnable leaves in a fixed order with stable names.
std::vector<std::pair<std::string, Value>> named_parameters(const Model& model);

/// [N, 3] constant tensor of positions.
Value coords_value(const std::vector<pcio::Vec3>& positions);

/// Shared per-point map 3 -> embed_hidden -> d with relu in between.
Value embed(const Model& model, const Value& coords);

/// Class logits [C]: embed, attention blocks, max-pool over points, head.
Value forward_cls(const Model& model, const pcio::PointCloud& pc, const attention::BlockOptions& options = {});

/// Per-point part logits [N, P] through the encoder/decoder pipeline.
Value forward_seg(const Model& model, const pcio::PointCloud& pc, const attention::BlockOptions& options = {});

/// Dispatches on the model task.
Value forward(const Model& model, const pcio::PointCloud& pc, const attention::BlockOptions& options = {});

}  // namespace pcattn::framework
