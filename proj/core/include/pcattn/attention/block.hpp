#pragma once

#include "pcattn/attention/config.hpp"
#include "pcattn/attention/params.hpp"
#include "pcattn/neighborhood/knn.hpp"

namespace pcattn::attention {

/// How local K/V are formed. `expanded` aggregates features per neighbor and
/// projects at N x K positions. `factored` projects center and neighbor
/// terms at N positions and gathers afterwards; it is algebraically equal
/// because every aggregated feature is linear in (center, neighbor).
enum class KeyRoute { expanded, factored };

struct BlockOptions {
  KeyRoute route = KeyRoute::factored;
};

/// Neighbor groups for a local block, ranked on `coords` or on the current
/// features `x` depending on cfg.basis.
neighborhood::NeighborIndex neighbors_for(const AttentionConfig& cfg, const Value& x, const Value& coords);

/// Attention output before the residual add, [N, d]. `coords` is [N, 3].
/// For local scope `neighbors` may be null, in which case it is computed.
Value attention_phi(const AttentionConfig& cfg, const AttentionParams& params, const Value& x, const Value& coords,
                    const neighborhood::NeighborIndex* neighbors = nullptr, const BlockOptions& options = {});

/// FFN(phi + x) with FFN = linear, relu, linear.
Value attention_block(const AttentionConfig& cfg, const AttentionParams& params, const Value& x,
                      const Value& coords, const neighborhood::NeighborIndex* neighbors = nullptr,
                      const BlockOptions& options = {});

}  // namespace pcattn::attention
