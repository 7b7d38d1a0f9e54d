#include "pcattn/attention/position_encoding.hpp"

#include "pcattn/errors.hpp"

namespace pcattn::attention {

using namespace numerics;

ScoresAndValues apply_position_encoding(const AttentionConfig& cfg, const PositionEncoders& enc,
                                        ScoresAndValues sv, const Value& q, const Value& k, const Value& coords) {
  if (cfg.pe == PositionEncoding::none || cfg.pe == PositionEncoding::pe1) return sv;
  if (coords.shape().back() != 3) throw DimensionError("coordinates must end in 3, got " + coords.shape().str());
  Value scores = sv.scores;

  if (cfg.scope == Scope::global) {
    const std::size_t n = coords.shape()[0];
    if (enc.score) scores = add(scores, reshape(linear(coords, *enc.score), Shape{1, n}));
    if (enc.key) scores = add(scores, matmul(q, transpose(linear(coords, *enc.key))));
    if (enc.query) scores = add(scores, matmul(linear(coords, *enc.query), transpose(k)));
  } else {
    const std::size_t n = coords.shape()[0];
    const std::size_t slots = coords.shape()[1];
    const Value qr = reshape(q, Shape{n, 1, q.shape()[1]});
    if (is_vector_method(cfg.method)) {
      if (enc.score) scores = add(scores, linear(coords, *enc.score));
      if (enc.key) scores = add(scores, mul(qr, linear(coords, *enc.key)));
      if (enc.query) throw ConfigError("vector attention has no query-side position encoding");
    } else {
      if (enc.score) scores = add(scores, reshape(linear(coords, *enc.score), Shape{n, slots}));
      if (enc.key) scores = add(scores, reduce(mul(qr, linear(coords, *enc.key)), 2, Reduction::sum));
      if (enc.query) scores = add(scores, reduce(mul(linear(coords, *enc.query), k), 2, Reduction::sum));
    }
  }
  Value values = sv.values;
  if (enc.value) values = add(values, linear(coords, *enc.value));
  return {scores, values};
}

}  // namespace pcattn::attention
