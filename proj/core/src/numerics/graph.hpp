#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pcattn/numerics/value.hpp"

namespace pcattn::numerics::internal {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

/// Wraps freshly computed data as an op output. The inputs and backward rule
/// are retained only when some input requires grad and recording is on.
inline Value make_result(Shape shape, std::vector<double> data, const char* op,
                         std::vector<NodePtr> inputs, std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  node->leaf = false;
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& in : inputs) needs = needs || in->requires_grad;
  }
  node->requires_grad = needs;
  if (needs) {
    node->inputs = std::move(inputs);
    node->backward = std::move(backward_fn);
  }
  return Value::from_node(std::move(node));
}

inline double* grad_of(const NodePtr& n) { return n->requires_grad ? n->grad.data() : nullptr; }

/// Splits `dims` around `axis` into outer * len * inner.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

inline AxisSplit split_axis(const std::vector<std::size_t>& dims, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= dims[i];
  s.len = dims[axis];
  for (std::size_t i = axis + 1; i < dims.size(); ++i) s.inner *= dims[i];
  return s;
}

}  // namespace pcattn::numerics::internal
