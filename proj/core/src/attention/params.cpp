#include "pcattn/attention/params.hpp"

#include <cmath>

namespace pcattn::attention {

std::size_t query_input_width(const AttentionConfig& cfg) {
  return cfg.dim + (cfg.pe == PositionEncoding::pe1 ? 3 : 0);
}

std::size_t key_input_width(const AttentionConfig& cfg) {
  return kv_multiplicity(cfg) * cfg.dim + (cfg.pe == PositionEncoding::pe1 ? 3 : 0);
}

EncoderWidths encoder_widths(const AttentionConfig& cfg) {
  const std::size_t d = cfg.dim;
  const bool vec = is_vector_method(cfg.method);
  EncoderWidths w;
  switch (cfg.pe) {
    case PositionEncoding::none:
    case PositionEncoding::pe1:
      break;
    case PositionEncoding::pe2:
      w.score = vec ? d : 1;
      w.value = d;
      break;
    case PositionEncoding::pe3:
      w.key = vec ? 1 : d;
      w.value = d;
      break;
    case PositionEncoding::pe4:
      w.key = d;
      w.query = d;
      w.value = d;
      break;
  }
  return w;
}

AttentionParams make_attention_params(const AttentionConfig& cfg, numerics::Rng& rng) {
  validate(cfg);
  const std::size_t d = cfg.dim;
  const std::size_t kin = key_input_width(cfg);
  AttentionParams p;
  p.wq = numerics::make_linear(query_input_width(cfg), d, rng);
  p.wk = numerics::make_linear(kin, d, rng);
  p.wv = numerics::make_linear(kin, d, rng);
  if (const std::size_t len = omega_length(cfg.method, d)) {
    p.omega = numerics::uniform_parameter(numerics::Shape{len}, 1.0 / std::sqrt(static_cast<double>(len)), rng);
  }
  const EncoderWidths w = encoder_widths(cfg);
  auto encoder = [&](std::size_t out) -> std::optional<LinearParams> {
    if (out == 0) return std::nullopt;
    return numerics::make_linear(3, out, rng);
  };
  p.pe.score = encoder(w.score);
  p.pe.key = encoder(w.key);
  p.pe.query = encoder(w.query);
  p.pe.value = encoder(w.value);
  for (std::size_t s = 1; s < key_groups(cfg); ++s) {
    ScaleExtras e;
    e.wk = numerics::make_linear(kin, d, rng);
    e.wv = numerics::make_linear(kin, d, rng);
    e.wo = numerics::make_linear(d, d, rng);
    p.extras.push_back(std::move(e));
  }
  p.ffn1 = numerics::make_linear(d, cfg.ffn_hidden, rng, false, 2.0);
  p.ffn2 = numerics::make_linear(cfg.ffn_hidden, d, rng);
  return p;
}

namespace {

void push_linear(std::vector<std::pair<std::string, Value>>& out, const std::string& name, const LinearParams& l) {
  out.emplace_back(name, l.weight);
  if (l.bias) out.emplace_back(name + ".bias", *l.bias);
}

}  // namespace

std::vector<std::pair<std::string, Value>> named_parameters(const AttentionParams& p, const std::string& prefix) {
  std::vector<std::pair<std::string, Value>> out;
  push_linear(out, prefix + "wq", p.wq);
  push_linear(out, prefix + "wk", p.wk);
  push_linear(out, prefix + "wv", p.wv);
  if (p.omega) out.emplace_back(prefix + "omega", *p.omega);
  if (p.pe.score) push_linear(out, prefix + "pe.score", *p.pe.score);
  if (p.pe.key) push_linear(out, prefix + "pe.key", *p.pe.key);
  if (p.pe.query) push_linear(out, prefix + "pe.query", *p.pe.query);
  if (p.pe.value) push_linear(out, prefix + "pe.value", *p.pe.value);
  for (std::size_t s = 0; s < p.extras.size(); ++s) {
    const std::string base = prefix + "extra" + std::to_string(s + 1) + ".";
    push_linear(out, base + "wk", p.extras[s].wk);
    push_linear(out, base + "wv", p.extras[s].wv);
    push_linear(out, base + "wo", p.extras[s].wo);
  }
  push_linear(out, prefix + "ffn1", p.ffn1);
  push_linear(out, prefix + "ffn2", p.ffn2);
  return out;
}

std::size_t linear_weight_count(const AttentionParams& p) {
  std::size_t n = 0;
  for (const auto& [name, v] : named_parameters(p)) {
    if (name != "omega") n += v.numel();
  }
  return n;
}

std::size_t vector_param_count(const AttentionParams& p) { return p.omega ? p.omega->numel() : 0; }

}  // namespace pcattn::attention
