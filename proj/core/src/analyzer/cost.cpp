#include "pcattn/analyzer/cost.hpp"

#include "pcattn/attention/params.hpp"
#include "pcattn/errors.hpp"

namespace pcattn::analyzer {

using namespace attention;

namespace {

std::uint64_t encoder_outputs(const AttentionConfig& cfg) {
  const EncoderWidths w = encoder_widths(cfg);
  return w.score + w.key + w.query + w.value;
}

/// Positions at which K/V projections and coordinate encoders run.
std::uint64_t kv_positions(const AttentionConfig& cfg, std::uint64_t n) {
  if (cfg.scope == Scope::global) return n;
  return n * key_groups(cfg) * slots_per_group(cfg);
}

}  // namespace

std::uint64_t count_params(const AttentionConfig& cfg) {
  validate(cfg);
  const std::uint64_t d = cfg.dim;
  const std::uint64_t qin = query_input_width(cfg);
  const std::uint64_t kin = key_input_width(cfg);
  const std::uint64_t extra_groups = cfg.scope == Scope::local ? key_groups(cfg) - 1 : 0;
  std::uint64_t p = qin * d + 2 * kin * d + 2 * d * cfg.ffn_hidden;
  p += 3 * encoder_outputs(cfg);
  p += extra_groups * (2 * kin * d + d * d);
  return p;
}

std::uint64_t count_flops(const AttentionConfig& cfg, std::size_t points) {
  validate(cfg);
  if (points == 0) throw ContractError("point count must be at least 1");
  const std::uint64_t n = points;
  const std::uint64_t d = cfg.dim;
  const std::uint64_t kv = kv_positions(cfg, n);
  const std::uint64_t extra_groups = cfg.scope == Scope::local ? key_groups(cfg) - 1 : 0;
  std::uint64_t mac = n * query_input_width(cfg) * d;
  mac += 2 * kv * key_input_width(cfg) * d;
  mac += 2 * n * d * cfg.ffn_hidden;
  mac += extra_groups * n * d * d;
  mac += kv * 3 * encoder_outputs(cfg);
  return 2 * mac;
}

CostReport analyze(const AttentionConfig& cfg, std::size_t points) {
  CostReport r;
  r.params = count_params(cfg);
  r.vector_params = omega_length(cfg.method, cfg.dim);
  r.pe_bias_params = encoder_outputs(cfg);
  r.flops = count_flops(cfg, points);
  r.points = points;
  return r;
}

InstantiatedCounts count_instantiated(const AttentionConfig& cfg) {
  numerics::Rng rng(0);
  const AttentionParams p = make_attention_params(cfg, rng);
  return {linear_weight_count(p), vector_param_count(p)};
}

}  // namespace pcattn::analyzer
