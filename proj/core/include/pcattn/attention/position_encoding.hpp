#pragma once

#include "pcattn/attention/config.hpp"
#include "pcattn/attention/params.hpp"

namespace pcattn::attention {

struct ScoresAndValues {
  Value scores;
  Value values;
};

/// Adds the coordinate-encoder terms of pe2..pe4 to unscaled scores and to V.
///
/// Global: scores [N, N], q/k [N, d], coords [N, 3] absolute.
/// Local scalar: scores [N, K], q [N, d], k [N, K, d], coords [N, K, 3]
/// relative (neighbor - center). Local vector: scores [N, K, d].
/// pe1 acts on the projection inputs instead, so it leaves both untouched.
ScoresAndValues apply_position_encoding(const AttentionConfig& cfg, const PositionEncoders& enc,
                                        ScoresAndValues sv, const Value& q, const Value& k, const Value& coords);

}  // namespace pcattn::attention
