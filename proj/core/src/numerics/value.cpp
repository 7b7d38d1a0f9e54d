#include "pcattn/numerics/value.hpp"

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <unordered_set>
#include <utility>

#include "pcattn/errors.hpp"

namespace pcattn::numerics {

namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<detail::Node> make_leaf(Shape shape, std::vector<double> data, bool requires_grad) {
  if (data.size() != shape.numel()) {
    throw DimensionError("data length " + std::to_string(data.size()) + " does not match shape " +
                         shape.str());
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

Value Value::constant(Shape shape, std::vector<double> data) {
  return from_node(make_leaf(std::move(shape), std::move(data), false));
}

Value Value::parameter(Shape shape, std::vector<double> data) {
  return from_node(make_leaf(std::move(shape), std::move(data), true));
}

Value Value::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Value Value::full(Shape shape, double fill, bool requires_grad) {
  std::vector<double> data(shape.numel(), fill);
  return from_node(make_leaf(std::move(shape), std::move(data), requires_grad));
}

Value Value::scalar(double v) { return constant(Shape{}, {v}); }

Value Value::from_node(std::shared_ptr<detail::Node> node) {
  Value v;
  v.node_ = std::move(node);
  return v;
}

std::span<double> Value::mutable_data() {
  if (!node_->leaf) throw ContractError("only leaf values may be mutated");
  return node_->data;
}

double Value::item() const {
  if (numel() != 1) throw ContractError("item() on value of shape " + shape().str());
  return node_->data[0];
}

void Value::zero_grad() {
  if (node_->requires_grad) node_->grad.assign(node_->data.size(), 0.0);
}

void configure_allocator() {
#ifdef __GLIBC__
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)done;
#endif
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() noexcept { return g_grad_enabled; }

void backward(const Value& root) {
  if (!root.defined() || root.numel() != 1) {
    throw ContractError("backward() needs a scalar root, got shape " +
                        (root.defined() ? root.shape().str() : std::string("<undefined>")));
  }
  if (!root.requires_grad()) throw ContractError("backward() root does not depend on any parameter");

  // Post-order DFS: inputs appear before their consumers.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::Node* n : order) {
    if (!n->leaf) {
      n->grad.assign(n->data.size(), 0.0);
    } else if (n->grad.size() != n->data.size()) {
      n->grad.assign(n->data.size(), 0.0);
    }
  }
  root.node()->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->leaf && n->backward) n->backward(*n);
    if (!n->leaf) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

}  // namespace pcattn::numerics
