#include "pcattn/cli/presets.hpp"

#include "pcattn/errors.hpp"

namespace pcattn::cli {

using attention::Aggregation;
using attention::AttentionConfig;
using attention::Method;
using attention::PositionEncoding;
using attention::Scope;

namespace {

AttentionConfig make(Method m, Aggregation agg, PositionEncoding pe) {
  AttentionConfig cfg;
  cfg.scope = attention::scope_of(m);
  cfg.method = m;
  cfg.aggregation = agg;
  cfg.pe = pe;
  cfg.k = 32;
  cfg.scales = {0};
  return cfg;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    const Aggregation neighbor{false, true, false};
    return std::vector<Preset>{
        {"cls_global", Task::classification, make(Method::g_l2sub, Aggregation::none(), PositionEncoding::pe3)},
        {"cls_local", Task::classification, make(Method::l_vec_sub, neighbor, PositionEncoding::pe2)},
        {"seg_global", Task::segmentation, make(Method::g_l2sub, Aggregation::none(), PositionEncoding::pe4)},
        {"seg_local", Task::segmentation, make(Method::l_offset_dot, neighbor, PositionEncoding::pe4)},
    };
  }();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace pcattn::cli
