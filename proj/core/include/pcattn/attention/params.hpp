#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcattn/attention/config.hpp"
#include "pcattn/numerics/linear.hpp"

namespace pcattn::attention {

using numerics::LinearParams;
using numerics::Value;

/// Coordinate encoders (all bias-free, input width 3). `score` adds to the
/// scores directly, `key` pairs with Q, `query` pairs with K and `value`
/// adds to V.
struct PositionEncoders {
  std::optional<LinearParams> score;
  std::optional<LinearParams> key;
  std::optional<LinearParams> query;
  std::optional<LinearParams> value;
};

/// K/V projections and output projection of one additional scale in
/// separate-keys mode.
struct ScaleExtras {
  LinearParams wk;
  LinearParams wv;
  LinearParams wo;
};

struct AttentionParams {
  LinearParams wq;
  LinearParams wk;
  LinearParams wv;
  std::optional<Value> omega;
  PositionEncoders pe;
  std::vector<ScaleExtras> extras;
  LinearParams ffn1;
  LinearParams ffn2;
};

/// Input width of wq: d, plus 3 with pe1.
std::size_t query_input_width(const AttentionConfig& cfg);
/// Input width of wk/wv: m d for m aggregated features, plus 3 with pe1.
std::size_t key_input_width(const AttentionConfig& cfg);

/// Output widths of the four encoders, 0 when absent.
struct EncoderWidths {
  std::size_t score = 0;
  std::size_t key = 0;
  std::size_t query = 0;
  std::size_t value = 0;
};
EncoderWidths encoder_widths(const AttentionConfig& cfg);

/// Validates `cfg` and draws fan-in scaled uniform weights.
AttentionParams make_attention_params(const AttentionConfig& cfg, numerics::Rng& rng);

/// Every leaf, named "<prefix>wq", "<prefix>extra1.wk", ... in a fixed order.
std::vector<std::pair<std::string, Value>> named_parameters(const AttentionParams& p, const std::string& prefix = "");

/// Elements in linear-layer weight matrices (omega excluded).
std::size_t linear_weight_count(const AttentionParams& p);
/// Elements in non-matrix parameters (omega).
std::size_t vector_param_count(const AttentionParams& p);

}  // namespace pcattn::attention
