#pragma once

#include <cstddef>
#include <cstdint>

#include "pcattn/attention/config.hpp"

namespace pcattn::analyzer {

using attention::AttentionConfig;

inline constexpr std::size_t kDefaultPoints = 1024;

/// Closed-form cost of one attention module (attention plus its FFN).
///
/// Parameters count linear-layer weight matrices. The omega vector of
/// l_add / l_concat is reported on its own in `vector_params`, and
/// `pe_bias_params` is what bias terms on the coordinate encoders would add.
/// FLOPs are 2 x multiply-accumulates of the linear maps evaluated at the
/// positions they are applied to; score contractions, softmax and
/// elementwise work are not counted.
struct CostReport {
  std::uint64_t params = 0;
  std::uint64_t vector_params = 0;
  std::uint64_t pe_bias_params = 0;
  std::uint64_t flops = 0;
  std::size_t points = kDefaultPoints;

  double params_k() const { return static_cast<double>(params) / 1e3; }
  double flops_g() const { return static_cast<double>(flops) / 1e9; }
};

/// Throws ConfigError for invalid configurations.
std::uint64_t count_params(const AttentionConfig& cfg);
std::uint64_t count_flops(const AttentionConfig& cfg, std::size_t points = kDefaultPoints);
CostReport analyze(const AttentionConfig& cfg, std::size_t points = kDefaultPoints);

/// Counts taken from a freshly built parameter set, for cross-checking.
struct InstantiatedCounts {
  std::uint64_t linear_weights = 0;
  std::uint64_t vector_params = 0;
};
InstantiatedCounts count_instantiated(const AttentionConfig& cfg);

}  // namespace pcattn::analyzer
