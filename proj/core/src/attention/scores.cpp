#include "pcattn/attention/scores.hpp"

#include <string>

#include "pcattn/errors.hpp"

namespace pcattn::attention {

using namespace numerics;

namespace {

void require_rank(const Value& v, std::size_t rank, const char* what) {
  if (v.rank() != rank) {
    throw DimensionError(std::string(what) + " must have rank " + std::to_string(rank) + ", got " + v.shape().str());
  }
}

/// [N, d] -> [N, 1, d] so it broadcasts along the neighbor axis.
Value repeat_axis(const Value& q) { return reshape(q, Shape{q.shape()[0], 1, q.shape()[1]}); }

void check_local(const Value& q, const Value& k) {
  require_rank(q, 2, "Q");
  require_rank(k, 3, "K");
  if (k.shape()[0] != q.shape()[0] || k.shape()[2] != q.shape()[1]) {
    throw DimensionError("local attention: Q " + q.shape().str() + " and K " + k.shape().str() + " disagree");
  }
}

/// [N, K]: q_i . k_ij as a batched product, without an [N, K, d] temporary.
Value neighbor_dot(const Value& q, const Value& k) {
  const std::size_t n = k.shape()[0];
  return reshape(matmul(k, reshape(q, Shape{n, q.shape()[1], 1})), Shape{n, k.shape()[1]});
}

}  // namespace

Value aggregate_local(const Value& center, const Value& grouped, const Aggregation& combo) {
  require_rank(center, 2, "center features");
  require_rank(grouped, 3, "grouped features");
  const std::size_t n = center.shape()[0];
  const std::size_t d = center.shape()[1];
  if (grouped.shape()[0] != n || grouped.shape()[2] != d) {
    throw DimensionError("aggregate_local: center " + center.shape().str() + " and grouped " +
                         grouped.shape().str() + " disagree");
  }
  if (combo.empty()) throw ConfigError("local aggregation needs at least one feature");
  const Shape full{n, grouped.shape()[1], d};
  const Value c = repeat_axis(center);
  std::vector<Value> parts;
  if (combo.center) parts.push_back(broadcast_to(c, full));
  if (combo.neighbor) parts.push_back(grouped);
  if (combo.offset) parts.push_back(sub(grouped, c));
  return parts.size() == 1 ? parts.front() : concat(parts, 2);
}

Value global_scores(Method method, const Value& q, const Value& k) {
  require_rank(q, 2, "Q");
  require_rank(k, 2, "K");
  const Value qk = matmul(q, transpose(k));
  if (method == Method::g_dot) return qk;
  if (method != Method::g_l2sub) throw ConfigError(std::string(to_string(method)) + " is not a global method");
  // -|q - k|^2 = 2 q.k - |q|^2 - |k|^2
  const Value qn = reduce(mul(q, q), 1, Reduction::sum, true);   // [N, 1]
  const Value kn = reshape(reduce(mul(k, k), 1, Reduction::sum), Shape{1, k.shape()[0]});
  return sub(sub(scale(qk, 2.0), qn), kn);
}

Value local_scalar_scores(Method method, const Value& q, const Value& k, const std::optional<Value>& omega) {
  check_local(q, k);
  const std::size_t n = k.shape()[0];
  const std::size_t slots = k.shape()[1];
  const std::size_t d = k.shape()[2];
  const Value qr = repeat_axis(q);
  switch (method) {
    case Method::l_dot:
      return neighbor_dot(q, k);
    case Method::l_offset_dot:
      // q.(q - k) = |q|^2 - q.k
      return sub(reduce(mul(q, q), 1, Reduction::sum, true), neighbor_dot(q, k));
    case Method::l_add: {
      if (!omega) throw ConfigError("l_add needs omega");
      if (omega->numel() != d) throw DimensionError("l_add: omega must have length " + std::to_string(d));
      const Value t = numerics::tanh(add(qr, k));
      return reshape(matmul(t, reshape(*omega, Shape{d, 1})), Shape{n, slots});
    }
    case Method::l_concat: {
      if (!omega) throw ConfigError("l_concat needs omega");
      if (omega->numel() != 2 * d) throw DimensionError("l_concat: omega must have length " + std::to_string(2 * d));
      // tanh acts per element, so w^T tanh([q | k]) = w_q^T tanh(q) + w_k^T tanh(k).
      const Value wq = reshape(slice(*omega, 0, 0, d), Shape{d, 1});
      const Value wk = reshape(slice(*omega, 0, d, 2 * d), Shape{d, 1});
      const Value sq = matmul(numerics::tanh(q), wq);                                   // [N, 1]
      const Value sk = reshape(matmul(numerics::tanh(k), wk), Shape{n, slots});         // [N, K]
      return add(sk, sq);
    }
    default:
      throw ConfigError(std::string(to_string(method)) + " is not a local scalar method");
  }
}

Value local_vector_scores(Method method, const Value& q, const Value& k) {
  check_local(q, k);
  const Value qr = repeat_axis(q);
  if (method == Method::l_vec_sub) return sub(qr, k);
  if (method == Method::l_vec_add) return add(qr, k);
  throw ConfigError(std::string(to_string(method)) + " is not a vector method");
}

Value attend_scalar(const Value& scores, const Value& v) {
  require_rank(scores, 2, "scores");
  const Value a = softmax(scores, 1);
  if (v.rank() == 2) return matmul(a, v);
  require_rank(v, 3, "V");
  const std::size_t n = scores.shape()[0];
  const std::size_t m = scores.shape()[1];
  const Value out = matmul(reshape(a, Shape{n, 1, m}), v);  // [N, 1, d]
  return reshape(out, Shape{n, v.shape()[2]});
}

Value attend_vector(const Value& scores, const Value& v) {
  require_rank(scores, 3, "scores");
  return softmax_weighted_sum(scores, v, 1);
}

Value phi_global_dot(const Value& q, const Value& k, const Value& v) {
  return attend_scalar(scale(global_scores(Method::g_dot, q, k), score_scale(Method::g_dot, q.shape()[1])), v);
}

Value phi_global_l2(const Value& q, const Value& k, const Value& v) {
  return attend_scalar(scale(global_scores(Method::g_l2sub, q, k), score_scale(Method::g_l2sub, q.shape()[1])), v);
}

Value phi_local_scalar(Method method, const Value& q, const Value& k, const Value& v,
                       const std::optional<Value>& omega) {
  const Value s = local_scalar_scores(method, q, k, omega);
  return attend_scalar(scale(s, score_scale(method, q.shape()[1])), v);
}

Value phi_local_vector(Method method, const Value& q, const Value& k, const Value& v) {
  return attend_vector(local_vector_scores(method, q, k), v);
}

}  // namespace pcattn::attention
