#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pcattn/numerics/value.hpp"

namespace pcattn::numerics {

/// Row-major rows x cols table of point indices.
struct IndexTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> ids;

  IndexTable() = default;
  IndexTable(std::size_t r, std::size_t c) : rows(r), cols(c), ids(r * c, 0) {}

  std::size_t& at(std::size_t r, std::size_t c) { return ids[r * cols + c]; }
  std::size_t at(std::size_t r, std::size_t c) const { return ids[r * cols + c]; }
  std::span<const std::size_t> row(std::size_t r) const {
    return std::span<const std::size_t>(ids).subspan(r * cols, cols);
  }
  bool operator==(const IndexTable&) const = default;
};

// Contraction over the last axis of `a` and the second-to-last of `b`.
// Leading axes broadcast; a rank-2 `b` is applied to every row of `a`.
Value matmul(const Value& a, const Value& b);

/// Swaps the last two axes.
Value transpose(const Value& x);

Value softmax(const Value& x, std::size_t axis);
/// sum over `axis` of softmax(scores, axis) * values, fused so the weights
/// never become a graph node. Shapes must match; `axis` is removed.
Value softmax_weighted_sum(const Value& scores, const Value& values, std::size_t axis);

enum class ElementwiseOp { add, sub, mul, tanh, relu, scale };

// Binary ops broadcast numpy-style: shapes are right-aligned and an extent
// of 1 stretches to match.
Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value tanh(const Value& x);
Value relu(const Value& x);
Value scale(const Value& x, double factor);

/// Dispatches to the named elementwise op. `b` is ignored by unary ops and
/// `factor` by everything except `scale`.
Value elementwise(ElementwiseOp op, const Value& a, const Value& b = {}, double factor = 1.0);

/// Elementwise map with a caller-supplied derivative.
Value unary(const Value& x, std::function<double(double)> fn,
            std::function<double(double)> derivative, const char* name = "unary");

enum class Reduction { sum, mean, max };

// max routes the subgradient to the first maximal element along the axis.
Value reduce(const Value& x, std::size_t axis, Reduction kind, bool keepdims = false);
Value sum_all(const Value& x);

Value reshape(const Value& x, Shape shape);
Value broadcast_to(const Value& x, Shape shape);
Value concat(std::span<const Value> parts, std::size_t axis);
Value concat(std::initializer_list<Value> parts, std::size_t axis);
Value slice(const Value& x, std::size_t axis, std::size_t begin, std::size_t end);

/// out[i, j, :] = x[idx(i, j), :] for x of shape [N, d].
Value gather(const Value& x, const IndexTable& idx);

/// Vector attention over gathered pairs without materializing them:
///   s_ij = score_center[i] + score_neighbor[idx(i, j)]
///   v_ij = value_center[i] + value_neighbor[idx(i, j)]
///   out[i] = sum_j softmax_j(s_ij) * v_ij, channelwise.
/// Either center may be left undefined (treated as zero). Returns [idx.rows, d].
Value pairwise_softmax_sum(const Value& score_center, const Value& score_neighbor, const Value& value_center,
                           const Value& value_neighbor, const IndexTable& idx);

/// Mean softmax cross-entropy of logits [M, C] (or [C]) against M labels.
Value cross_entropy(const Value& logits, std::span<const std::size_t> labels);

/// Broadcast result shape; throws DimensionError naming both shapes.
Shape broadcast_shapes(const Shape& a, const Shape& b);

}  // namespace pcattn::numerics
