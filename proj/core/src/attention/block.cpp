#include "pcattn/attention/block.hpp"

#include <string>

#include "pcattn/attention/position_encoding.hpp"
#include "pcattn/attention/scores.hpp"
#include "pcattn/errors.hpp"

namespace pcattn::attention {

using namespace numerics;

namespace {

Value relative_coords(const Value& coords, const IndexTable& ids) {
  const std::size_t n = coords.shape()[0];
  return sub(gather(coords, ids), reshape(coords, Shape{n, 1, 3}));
}

Value with_coords(const AttentionConfig& cfg, const Value& x, const Value& coords) {
  return cfg.pe == PositionEncoding::pe1 ? concat({x, coords}, 1) : x;
}

/// T_ij = center_i + neighbor_{ids(i, j)}: the form every linear map of the
/// aggregated local features takes.
struct Pairwise {
  std::optional<Value> center;
  Value neighbor;
};

Value expand(const Pairwise& p, const IndexTable& ids) {
  Value out = gather(p.neighbor, ids);
  if (p.center) out = add(out, reshape(*p.center, Shape{ids.rows, 1, p.center->shape()[1]}));
  return out;
}

// W rows are laid out [center | neighbor | offset | coords]. With
// offset = neighbor - center and relative coords p_j - p_i,
//   agg_ij . W = x_i (Wc - Wo) - p_i Wp + x_j (Wn + Wo) + p_j Wp.
Pairwise project_factored(const AttentionConfig& cfg, const LinearParams& w, const Value& x, const Value& coords) {
  const std::size_t d = cfg.dim;
  std::size_t row = 0;
  auto take = [&](bool present) -> std::optional<Value> {
    if (!present) return std::nullopt;
    Value part = slice(w.weight, 0, row, row + d);
    row += d;
    return part;
  };
  const auto wc = take(cfg.aggregation.center);
  const auto wn = take(cfg.aggregation.neighbor);
  const auto wo = take(cfg.aggregation.offset);

  std::optional<Value> center_w = wc;
  if (wo) center_w = center_w ? sub(*center_w, *wo) : scale(*wo, -1.0);
  std::optional<Value> neighbor_w = wn;
  if (wo) neighbor_w = neighbor_w ? add(*neighbor_w, *wo) : *wo;
  if (!neighbor_w) throw ContractError("local aggregation must include neighbor or offset features");

  Pairwise out{std::nullopt, matmul(x, *neighbor_w)};
  if (center_w) out.center = matmul(x, *center_w);
  if (cfg.pe == PositionEncoding::pe1) {
    const Value p = matmul(coords, slice(w.weight, 0, row, row + 3));
    out.neighbor = add(out.neighbor, p);
    out.center = out.center ? sub(*out.center, p) : scale(p, -1.0);
  }
  if (w.bias) out.neighbor = add(out.neighbor, *w.bias);
  return out;
}

// Vector-method encoders that only see relative coordinates through a
// bias-free linear map split as p_j W - p_i W.
bool pairwise_encoders(const AttentionConfig& cfg, const PositionEncoders& enc) {
  if (cfg.pe == PositionEncoding::none || cfg.pe == PositionEncoding::pe1) return true;
  if (enc.key || enc.query) return false;
  for (const auto& e : {enc.score, enc.value}) {
    if (e && e->bias) return false;
  }
  return true;
}

void add_relative(Pairwise& p, const LinearParams& enc, const Value& coords) {
  const Value pw = matmul(coords, enc.weight);
  p.neighbor = add(p.neighbor, pw);
  p.center = p.center ? sub(*p.center, pw) : scale(pw, -1.0);
}

Value local_group(const AttentionConfig& cfg, const AttentionParams& params, const LinearParams& wk,
                  const LinearParams& wv, const Value& q, const Value& x, const Value& coords, const IndexTable& ids,
                  KeyRoute route) {
  const bool vec = is_vector_method(cfg.method);
  Value k;
  ScoresAndValues sv;
  if (route == KeyRoute::expanded) {
    Value agg = aggregate_local(x, gather(x, ids), cfg.aggregation);
    if (cfg.pe == PositionEncoding::pe1) agg = concat({agg, relative_coords(coords, ids)}, 2);
    k = linear(agg, wk);
    sv.values = linear(agg, wv);
    sv.scores = vec ? local_vector_scores(cfg.method, q, k) : local_scalar_scores(cfg.method, q, k, params.omega);
  } else {
    const Pairwise kp = project_factored(cfg, wk, x, coords);
    if (vec) {
      // q_i -/+ k_ij keeps the pairwise form, so K itself is never built.
      Pairwise sp;
      if (cfg.method == Method::l_vec_sub) {
        sp = {kp.center ? sub(q, *kp.center) : q, scale(kp.neighbor, -1.0)};
      } else {
        sp = {kp.center ? add(q, *kp.center) : q, kp.neighbor};
      }
      Pairwise vp = project_factored(cfg, wv, x, coords);
      if (pairwise_encoders(cfg, params.pe)) {
        if (params.pe.score) add_relative(sp, *params.pe.score, coords);
        if (params.pe.value) add_relative(vp, *params.pe.value, coords);
        return pairwise_softmax_sum(sp.center ? *sp.center : Value{}, sp.neighbor,
                                    vp.center ? *vp.center : Value{}, vp.neighbor, ids);
      }
      sv.scores = expand(sp, ids);
      sv.values = expand(vp, ids);
    } else {
      k = expand(kp, ids);
      sv.values = expand(project_factored(cfg, wv, x, coords), ids);
      sv.scores = local_scalar_scores(cfg.method, q, k, params.omega);
    }
  }
  if (cfg.pe != PositionEncoding::none && cfg.pe != PositionEncoding::pe1) {
    sv = apply_position_encoding(cfg, params.pe, sv, q, k, relative_coords(coords, ids));
  }
  const double s = score_scale(cfg.method, cfg.dim);
  const Value scores = s == 1.0 ? sv.scores : scale(sv.scores, s);
  return vec ? attend_vector(scores, sv.values) : attend_scalar(scores, sv.values);
}

void check_inputs(const AttentionConfig& cfg, const AttentionParams& params, const Value& x, const Value& coords) {
  if (x.rank() != 2 || x.shape()[1] != cfg.dim) {
    throw DimensionError("block input must be [N, " + std::to_string(cfg.dim) + "], got " + x.shape().str());
  }
  if (coords.rank() != 2 || coords.shape()[0] != x.shape()[0] || coords.shape()[1] != 3) {
    throw DimensionError("coordinates must be [N, 3] matching features " + x.shape().str() + ", got " +
                         coords.shape().str());
  }
  if (params.wq.in() != query_input_width(cfg) || params.wk.in() != key_input_width(cfg) ||
      params.extras.size() + 1 != std::max<std::size_t>(key_groups(cfg), 1)) {
    throw ContractError("attention parameters were built for a different configuration");
  }
}

}  // namespace

neighborhood::NeighborIndex neighbors_for(const AttentionConfig& cfg, const Value& x, const Value& coords) {
  if (cfg.scope != Scope::local) throw ContractError("global attention has no neighbor groups");
  const std::size_t n = x.shape()[0];
  const bool by_coords = cfg.basis == Basis::coords;
  const Value& src = by_coords ? coords : x;
  const std::size_t need = neighborhood::required_ranks(cfg.k, cfg.scales, cfg.key_mode);
  if (need > n) {
    throw ContractError("neighbor selection needs " + std::to_string(need) + " ranked points but the cloud has " +
                        std::to_string(n));
  }
  return neighborhood::build_neighbor_index(src.data(), n, src.shape()[1], cfg.k, cfg.scales, cfg.key_mode,
                                            cfg.basis);
}

Value attention_phi(const AttentionConfig& cfg, const AttentionParams& params, const Value& x, const Value& coords,
                    const neighborhood::NeighborIndex* neighbors, const BlockOptions& options) {
  validate(cfg);
  check_inputs(cfg, params, x, coords);
  const Value q = linear(with_coords(cfg, x, coords), params.wq);

  if (cfg.scope == Scope::global) {
    const Value xkv = with_coords(cfg, x, coords);
    const Value k = linear(xkv, params.wk);
    ScoresAndValues sv{global_scores(cfg.method, q, k), linear(xkv, params.wv)};
    if (cfg.pe != PositionEncoding::none && cfg.pe != PositionEncoding::pe1) {
      sv = apply_position_encoding(cfg, params.pe, sv, q, k, coords);
    }
    return attend_scalar(scale(sv.scores, score_scale(cfg.method, cfg.dim)), sv.values);
  }

  neighborhood::NeighborIndex local;
  if (!neighbors) {
    local = neighbors_for(cfg, x, coords);
    neighbors = &local;
  }
  if (neighbors->groups.size() != key_groups(cfg) || neighbors->points() != x.shape()[0]) {
    throw ContractError("neighbor index does not match the attention configuration");
  }
  Value out;
  for (std::size_t g = 0; g < neighbors->groups.size(); ++g) {
    const IndexTable& ids = neighbors->groups[g].ids;
    if (ids.cols != slots_per_group(cfg)) {
      throw ContractError("neighbor group " + std::to_string(g) + " has " + std::to_string(ids.cols) +
                          " slots, expected " + std::to_string(slots_per_group(cfg)));
    }
    if (g == 0) {
      out = local_group(cfg, params, params.wk, params.wv, q, x, coords, ids, options.route);
    } else {
      const ScaleExtras& e = params.extras[g - 1];
      out = add(out, linear(local_group(cfg, params, e.wk, e.wv, q, x, coords, ids, options.route), e.wo));
    }
  }
  return out;
}

Value attention_block(const AttentionConfig& cfg, const AttentionParams& params, const Value& x,
                      const Value& coords, const neighborhood::NeighborIndex* neighbors,
                      const BlockOptions& options) {
  const Value h = add(attention_phi(cfg, params, x, coords, neighbors, options), x);
  return linear(relu(linear(h, params.ffn1)), params.ffn2);
}

}  // namespace pcattn::attention
