#pragma once

#include <optional>

#include "pcattn/attention/config.hpp"
#include "pcattn/numerics/ops.hpp"

namespace pcattn::attention {

using numerics::Value;

/// [N, K, |combo| d]: center (broadcast over K), neighbor, offset
/// (neighbor - center), concatenated in that order.
Value aggregate_local(const Value& center, const Value& grouped, const Aggregation& combo);

/// Unscaled global scores [N, N]: Q K^T for g_dot, -|Q_i - K_j|^2 for g_l2sub
/// (by expansion, without an N x N x d intermediate).
Value global_scores(Method method, const Value& q, const Value& k);

/// Unscaled scalar scores [N, K] for l_dot, l_offset_dot, l_add, l_concat.
/// Q is [N, d], K is [N, K, d]; omega is required for l_add / l_concat.
Value local_scalar_scores(Method method, const Value& q, const Value& k, const std::optional<Value>& omega);

/// Per-channel scores [N, K, d] for l_vec_sub (Q_i - K_ij) and l_vec_add.
Value local_vector_scores(Method method, const Value& q, const Value& k);

/// softmax over keys of scores [N, M], times V [N, M, d] (local) or [M, d]
/// (global). Returns [N, d].
Value attend_scalar(const Value& scores, const Value& v);

/// softmax over the neighbor axis of [N, K, d] per channel; sums a * V over
/// neighbors. Returns [N, d].
Value attend_vector(const Value& scores, const Value& v);

Value phi_global_dot(const Value& q, const Value& k, const Value& v);
Value phi_global_l2(const Value& q, const Value& k, const Value& v);
Value phi_local_scalar(Method method, const Value& q, const Value& k, const Value& v,
                       const std::optional<Value>& omega = std::nullopt);
Value phi_local_vector(Method method, const Value& q, const Value& k, const Value& v);

}  // namespace pcattn::attention
