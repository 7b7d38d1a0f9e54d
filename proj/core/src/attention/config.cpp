#include "pcattn/attention/config.hpp"

#include <algorithm>
#include <cmath>

#include "pcattn/errors.hpp"

namespace pcattn::attention {

Scope scope_of(Method m) { return (m == Method::g_dot || m == Method::g_l2sub) ? Scope::global : Scope::local; }

bool is_vector_method(Method m) { return m == Method::l_vec_sub || m == Method::l_vec_add; }

bool needs_omega(Method m) { return m == Method::l_add || m == Method::l_concat; }

std::size_t omega_length(Method m, std::size_t dim) {
  if (m == Method::l_add) return dim;
  if (m == Method::l_concat) return 2 * dim;
  return 0;
}

double score_scale(Method m, std::size_t dim) {
  switch (m) {
    case Method::g_dot:
    case Method::g_l2sub:
    case Method::l_dot:
    case Method::l_offset_dot:
      return 1.0 / std::sqrt(static_cast<double>(dim));
    default:
      return 1.0;
  }
}

std::vector<Aggregation> allowed_aggregations(Method m) {
  const Aggregation n{false, true, false};
  const Aggregation o{false, false, true};
  const Aggregation cn{true, true, false};
  const Aggregation co{true, false, true};
  const Aggregation no{false, true, true};
  const Aggregation cno{true, true, true};
  switch (m) {
    case Method::g_dot:
    case Method::g_l2sub:
      return {Aggregation::none()};
    case Method::l_dot:
      return {n, o, cn, co, no, cno};
    case Method::l_offset_dot:
    case Method::l_vec_sub:
      return {n, cn};
    case Method::l_add:
    case Method::l_concat:
    case Method::l_vec_add:
      return {n, o, no};
  }
  return {};
}

std::optional<std::string> validation_error(const AttentionConfig& cfg) {
  const std::string method(to_string(cfg.method));
  if (cfg.dim == 0) return "dim must be at least 1";
  if (cfg.ffn_hidden == 0) return "ffn_hidden must be at least 1";
  if (cfg.scope != scope_of(cfg.method)) {
    return "method " + method + " is " + std::string(to_string(scope_of(cfg.method))) + " but scope is " +
           std::string(to_string(cfg.scope));
  }
  const auto allowed = allowed_aggregations(cfg.method);
  if (std::find(allowed.begin(), allowed.end(), cfg.aggregation) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + to_string(a);
    if (cfg.scope == Scope::global) {
      return "global method " + method + " takes no local aggregation, got " + to_string(cfg.aggregation);
    }
    std::string rule;
    if (cfg.aggregation.empty()) {
      rule = "local attention needs at least one aggregated feature";
    } else if ((cfg.method == Method::l_offset_dot || cfg.method == Method::l_vec_sub) && cfg.aggregation.offset) {
      rule = "offset aggregation is implicit in subtraction-based scores";
    } else if (cfg.aggregation.center && cfg.method != Method::l_dot) {
      rule = std::string("center aggregation is excluded for ") +
             (cfg.method == Method::l_concat ? "concat" : "addition") + "-based scores";
    } else {
      rule = "unsupported combination";
    }
    return "aggregation " + to_string(cfg.aggregation) + " is not valid for " + method + " (" + rule +
           "); valid sets: " + list;
  }
  if (cfg.pe == PositionEncoding::pe4 && is_vector_method(cfg.method)) {
    return "pe4 has no wiring for vector attention (" + method + ")";
  }
  if (cfg.scope == Scope::local) {
    if (cfg.k == 0) return "k must be at least 1";
    if (cfg.scales.empty()) return "local attention needs at least one scale";
    for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
      if (cfg.scales[i] > 16) return "scale " + std::to_string(cfg.scales[i]) + " is too large";
      for (std::size_t j = 0; j < i; ++j) {
        if (cfg.scales[i] == cfg.scales[j]) return "scale " + std::to_string(cfg.scales[i]) + " is repeated";
      }
    }
  }
  return std::nullopt;
}

void validate(const AttentionConfig& cfg) {
  if (auto err = validation_error(cfg)) throw ConfigError(*err);
}

std::size_t key_groups(const AttentionConfig& cfg) {
  if (cfg.scope == Scope::global) return 0;
  return (cfg.key_mode == KeyMode::separate && cfg.scales.size() > 1) ? cfg.scales.size() : 1;
}

std::size_t slots_per_group(const AttentionConfig& cfg) {
  if (cfg.scope == Scope::global) return 0;
  return key_groups(cfg) == 1 ? cfg.k * cfg.scales.size() : cfg.k;
}

std::size_t kv_multiplicity(const AttentionConfig& cfg) {
  return cfg.scope == Scope::global ? 1 : cfg.aggregation.count();
}

std::string_view to_string(Scope s) { return s == Scope::global ? "global" : "local"; }

std::string_view to_string(Method m) {
  switch (m) {
    case Method::g_dot: return "g_dot";
    case Method::g_l2sub: return "g_l2sub";
    case Method::l_dot: return "l_dot";
    case Method::l_offset_dot: return "l_offset_dot";
    case Method::l_add: return "l_add";
    case Method::l_concat: return "l_concat";
    case Method::l_vec_sub: return "l_vec_sub";
    case Method::l_vec_add: return "l_vec_add";
  }
  return "?";
}

std::string_view to_string(PositionEncoding pe) {
  switch (pe) {
    case PositionEncoding::none: return "none";
    case PositionEncoding::pe1: return "pe1";
    case PositionEncoding::pe2: return "pe2";
    case PositionEncoding::pe3: return "pe3";
    case PositionEncoding::pe4: return "pe4";
  }
  return "?";
}

std::vector<std::string> aggregation_names(const Aggregation& a) {
  std::vector<std::string> out;
  if (a.center) out.emplace_back("center");
  if (a.neighbor) out.emplace_back("neighbor");
  if (a.offset) out.emplace_back("offset");
  return out;
}

std::string to_string(const Aggregation& a) {
  std::string s = "{";
  for (const auto& n : aggregation_names(a)) s += (s.size() > 1 ? "," : "") + n;
  return s + "}";
}

Scope parse_scope(std::string_view s) {
  if (s == "global") return Scope::global;
  if (s == "local") return Scope::local;
  throw ConfigError("unknown scope '" + std::string(s) + "' (expected global or local)");
}

Method parse_method(std::string_view s) {
  for (Method m : {Method::g_dot, Method::g_l2sub, Method::l_dot, Method::l_offset_dot, Method::l_add,
                   Method::l_concat, Method::l_vec_sub, Method::l_vec_add}) {
    if (to_string(m) == s) return m;
  }
  if (s == "g_add" || s == "g_sub") {
    throw ConfigError("method " + std::string(s) +
                      " is not supported: global direct addition/subtraction needs a too large size tensor "
                      "(N x N x d)");
  }
  throw ConfigError("unknown attention method '" + std::string(s) + "'");
}

PositionEncoding parse_pe(std::string_view s) {
  for (PositionEncoding pe : {PositionEncoding::none, PositionEncoding::pe1, PositionEncoding::pe2,
                              PositionEncoding::pe3, PositionEncoding::pe4}) {
    if (to_string(pe) == s) return pe;
  }
  throw ConfigError("unknown position encoding '" + std::string(s) + "' (expected none, pe1..pe4)");
}

KeyMode parse_key_mode(std::string_view s) {
  if (s == "one") return KeyMode::one;
  if (s == "separate") return KeyMode::separate;
  throw ConfigError("unknown key_mode '" + std::string(s) + "' (expected one or separate)");
}

Basis parse_basis(std::string_view s) {
  if (s == "coords") return Basis::coords;
  if (s == "features") return Basis::features;
  throw ConfigError("unknown basis '" + std::string(s) + "' (expected coords or features)");
}

Aggregation parse_aggregation(const std::vector<std::string>& names) {
  Aggregation a;
  for (const auto& n : names) {
    bool* slot = n == "center" ? &a.center : n == "neighbor" ? &a.neighbor : n == "offset" ? &a.offset : nullptr;
    if (!slot) throw ConfigError("unknown aggregation feature '" + n + "'");
    if (*slot) throw ConfigError("aggregation feature '" + n + "' listed twice");
    *slot = true;
  }
  return a;
}

std::string describe(const AttentionConfig& cfg) {
  std::string s = std::string(to_string(cfg.scope)) + " " + std::string(to_string(cfg.method));
  if (cfg.scope == Scope::local) {
    s += " agg=" + to_string(cfg.aggregation);
    s += " k=" + std::to_string(cfg.k) + " scales=";
    for (std::size_t i = 0; i < cfg.scales.size(); ++i) s += (i ? "+" : "") + std::to_string(cfg.scales[i]);
    if (cfg.scales.size() > 1) s += " key=" + std::string(neighborhood::to_string(cfg.key_mode));
    s += " basis=" + std::string(neighborhood::to_string(cfg.basis));
  }
  s += " pe=" + std::string(to_string(cfg.pe));
  return s;
}

}  // namespace pcattn::attention
