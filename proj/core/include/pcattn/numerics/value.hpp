#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "pcattn/numerics/shape.hpp"

namespace pcattn::numerics {

using Rng = std::mt19937_64;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Adds this node's grad into the grads of `inputs`.
  std::function<void(Node&)> backward;
};

}  // namespace detail

/// Handle to a node in a computation graph.
///
/// Copies share the node. Op outputs are immutable; leaves created with
/// `parameter` may be updated in place by an optimizer.
class Value {
 public:
  Value() = default;

  static Value constant(Shape shape, std::vector<double> data);
  static Value parameter(Shape shape, std::vector<double> data);
  static Value zeros(Shape shape, bool requires_grad = false);
  static Value full(Shape shape, double fill, bool requires_grad = false);
  static Value scalar(double v);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->data.size(); }
  std::size_t rank() const { return node_->shape.rank(); }

  std::span<const double> data() const { return node_->data; }
  /// Writable storage; only leaves may be mutated.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->leaf; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  void zero_grad();

  const char* op_name() const { return node_->op; }
  const std::shared_ptr<detail::Node>& node() const { return node_; }
  static Value from_node(std::shared_ptr<detail::Node> node);

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

/// Keeps large tensor buffers on the heap rather than in fresh page
/// mappings, which otherwise dominate training time. No-op off glibc.
void configure_allocator();

/// Reverse-mode sweep from a single-element root. Leaf grads accumulate
/// across calls; intermediate grads are released afterwards.
void backward(const Value& root);

}  // namespace pcattn::numerics
