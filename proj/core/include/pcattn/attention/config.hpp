#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcattn/neighborhood/knn.hpp"

namespace pcattn::attention {

using neighborhood::Basis;
using neighborhood::KeyMode;

enum class Scope { global, local };

/// Score functions. g_* attend over all points, l_* over a neighborhood.
enum class Method { g_dot, g_l2sub, l_dot, l_offset_dot, l_add, l_concat, l_vec_sub, l_vec_add };

enum class PositionEncoding { none, pe1, pe2, pe3, pe4 };

/// Which local features feed K and V. Concatenation order is always
/// center, neighbor, offset.
struct Aggregation {
  bool center = false;
  bool neighbor = false;
  bool offset = false;

  std::size_t count() const { return std::size_t{center} + std::size_t{neighbor} + std::size_t{offset}; }
  bool empty() const { return count() == 0; }
  bool operator==(const Aggregation&) const = default;

  static Aggregation none() { return {}; }
  static Aggregation of(bool c, bool n, bool o) { return {c, n, o}; }
};

struct AttentionConfig {
  Scope scope = Scope::local;
  Method method = Method::l_dot;
  Aggregation aggregation{false, false, true};
  PositionEncoding pe = PositionEncoding::none;
  std::size_t k = 32;
  std::vector<std::size_t> scales{0};
  KeyMode key_mode = KeyMode::one;
  Basis basis = Basis::features;
  std::size_t dim = 128;
  std::size_t ffn_hidden = 512;

  bool operator==(const AttentionConfig&) const = default;
};

Scope scope_of(Method m);
bool is_vector_method(Method m);
bool needs_omega(Method m);
/// Length of omega for l_add (d) and l_concat (2d); 0 otherwise.
std::size_t omega_length(Method m, std::size_t dim);
/// 1/sqrt(d) for the dot and L2 families, 1 for the rest.
double score_scale(Method m, std::size_t dim);

/// Aggregation sets accepted for a method, in a fixed order.
std::vector<Aggregation> allowed_aggregations(Method m);

/// Throws ConfigError describing the first violated rule.
void validate(const AttentionConfig& cfg);
/// Same checks, returning the message instead of throwing.
std::optional<std::string> validation_error(const AttentionConfig& cfg);

/// Number of K/V groups the block attends over: |scales| in separate-keys
/// mode with several scales, otherwise 1 (0 for global scope).
std::size_t key_groups(const AttentionConfig& cfg);
/// Neighbor slots per point in one group.
std::size_t slots_per_group(const AttentionConfig& cfg);
/// Aggregated feature count feeding K/V (1 for global).
std::size_t kv_multiplicity(const AttentionConfig& cfg);

std::string_view to_string(Scope s);
std::string_view to_string(Method m);
std::string_view to_string(PositionEncoding pe);
std::string to_string(const Aggregation& a);

Scope parse_scope(std::string_view s);
/// Also recognizes g_add and g_sub, which are rejected: they would need an
/// N x N x d tensor.
Method parse_method(std::string_view s);
PositionEncoding parse_pe(std::string_view s);
KeyMode parse_key_mode(std::string_view s);
Basis parse_basis(std::string_view s);
/// Accepts "center", "neighbor", "offset".
Aggregation parse_aggregation(const std::vector<std::string>& names);
std::vector<std::string> aggregation_names(const Aggregation& a);

/// One-line human readable summary.
std::string describe(const AttentionConfig& cfg);

}  // namespace pcattn::attention
