#include "pcattn/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "graph.hpp"
#include "pcattn/errors.hpp"

namespace pcattn::numerics {

using internal::grad_of;
using internal::make_result;
using internal::Node;
using internal::NodePtr;
using internal::split_axis;

// ---------------------------------------------------------------------------
// Broadcasting

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.rank(), b.rank());
  std::vector<std::size_t> out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.rank() ? 1 : a[i - (rank - a.rank())];
    const std::size_t db = i < rank - b.rank() ? 1 : b[i - (rank - b.rank())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError("shapes " + a.str() + " and " + b.str() + " are not broadcast-compatible");
    }
    out[i] = std::max(da, db);
  }
  return Shape(std::move(out));
}

namespace {

// Iteration plan over a contiguous output with up to two broadcast operands.
// Adjacent axes are merged whenever every operand walks them contiguously,
// so the innermost loop is as long as possible. Innermost strides are 0 or 1.
struct BroadcastPlan {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> sa;
  std::vector<std::size_t> sb;
  std::size_t total = 1;
};

std::vector<std::size_t> aligned_strides(const Shape& s, const Shape& out) {
  const std::size_t rank = out.rank();
  std::vector<std::size_t> strides(rank, 0);
  std::size_t stride = 1;
  for (std::size_t i = rank; i-- > 0;) {
    const std::size_t offset = rank - s.rank();
    if (i < offset) continue;
    const std::size_t d = s[i - offset];
    strides[i] = d == 1 ? 0 : stride;
    stride *= d;
  }
  return strides;
}

BroadcastPlan make_plan(const Shape& a, const Shape& b, const Shape& out) {
  BroadcastPlan p;
  p.total = out.numel();
  const auto sa = aligned_strides(a, out);
  const auto sb = aligned_strides(b, out);
  for (std::size_t i = 0; i < out.rank(); ++i) {
    if (out[i] == 1) continue;
    if (!p.dims.empty()) {
      const std::size_t d = out[i];
      if (p.sa.back() == sa[i] * d && p.sb.back() == sb[i] * d) {
        p.dims.back() *= d;
        p.sa.back() = sa[i];
        p.sb.back() = sb[i];
        continue;
      }
    }
    p.dims.push_back(out[i]);
    p.sa.push_back(sa[i]);
    p.sb.push_back(sb[i]);
  }
  return p;
}

// Calls inner(io, ia, ib, n, sa, sb) once per innermost run.
template <class Inner>
void iterate(const BroadcastPlan& p, Inner&& inner) {
  const std::size_t r = p.dims.size();
  if (r == 0) {
    inner(std::size_t{0}, std::size_t{0}, std::size_t{0}, std::size_t{1}, std::size_t{0},
          std::size_t{0});
    return;
  }
  const std::size_t n = p.dims[r - 1];
  const std::size_t sa = p.sa[r - 1];
  const std::size_t sb = p.sb[r - 1];
  std::vector<std::size_t> idx(r - 1, 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  const std::size_t runs = p.total / n;
  for (std::size_t t = 0, io = 0; t < runs; ++t, io += n) {
    inner(io, ia, ib, n, sa, sb);
    for (std::size_t d = r - 1; d-- > 0;) {
      ++idx[d];
      ia += p.sa[d];
      ib += p.sb[d];
      if (idx[d] < p.dims[d]) break;
      ia -= p.sa[d] * p.dims[d];
      ib -= p.sb[d] * p.dims[d];
      idx[d] = 0;
    }
  }
}

// Dispatches the four innermost stride patterns so the common ones vectorize.
template <class Body>
void dispatch_strides(std::size_t sa, std::size_t sb, Body&& body) {
  using one = std::integral_constant<std::size_t, 1>;
  using zero = std::integral_constant<std::size_t, 0>;
  if (sa == 1 && sb == 1) {
    body(one{}, one{});
  } else if (sa == 1) {
    body(one{}, zero{});
  } else if (sb == 1) {
    body(zero{}, one{});
  } else {
    body(zero{}, zero{});
  }
}

template <class Op>
void binary_forward(const BroadcastPlan& p, const double* A, const double* B, double* O, Op op) {
  iterate(p, [&](std::size_t io, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                 std::size_t sb) {
    double* o = O + io;
    const double* a = A + ia;
    const double* b = B + ib;
    dispatch_strides(sa, sb, [&](auto SA, auto SB) {
      for (std::size_t j = 0; j < n; ++j) o[j] = op(a[j * SA], b[j * SB]);
    });
  });
}

// target[i(j)] += contrib(out index, other-operand index) over the plan.
// `first` selects whether the target is operand a (true) or b.
template <class Contrib>
void binary_accumulate(const BroadcastPlan& p, bool first, double* target, Contrib contrib) {
  iterate(p, [&](std::size_t io, std::size_t ia, std::size_t ib, std::size_t n, std::size_t sa,
                 std::size_t sb) {
    const std::size_t it = first ? ia : ib;
    const std::size_t io_other = first ? ib : ia;
    const std::size_t st = first ? sa : sb;
    const std::size_t so = first ? sb : sa;
    double* t = target + it;
    dispatch_strides(st, so, [&](auto ST, auto SO) {
      if constexpr (ST == 0) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += contrib(io + j, io_other + j * SO);
        t[0] += acc;
      } else {
        for (std::size_t j = 0; j < n; ++j) t[j] += contrib(io + j, io_other + j * SO);
      }
    });
  });
}

enum class BinaryKind { add, sub, mul };

Value binary(const Value& a, const Value& b, BinaryKind kind) {
  const Shape out = broadcast_shapes(a.shape(), b.shape());
  auto plan = std::make_shared<BroadcastPlan>(make_plan(a.shape(), b.shape(), out));
  std::vector<double> data(out.numel());
  const double* A = a.data().data();
  const double* B = b.data().data();
  const char* name = "add";
  switch (kind) {
    case BinaryKind::add:
      binary_forward(*plan, A, B, data.data(), [](double x, double y) { return x + y; });
      break;
    case BinaryKind::sub:
      name = "sub";
      binary_forward(*plan, A, B, data.data(), [](double x, double y) { return x - y; });
      break;
    case BinaryKind::mul:
      name = "mul";
      binary_forward(*plan, A, B, data.data(), [](double x, double y) { return x * y; });
      break;
  }
  return make_result(out, std::move(data), name, {a.node(), b.node()}, [plan, kind](Node& self) {
    const double* g = self.grad.data();
    const NodePtr& na = self.inputs[0];
    const NodePtr& nb = self.inputs[1];
    if (double* ga = grad_of(na)) {
      if (kind == BinaryKind::mul) {
        const double* B = nb->data.data();
        binary_accumulate(*plan, true, ga, [&](std::size_t o, std::size_t k) { return g[o] * B[k]; });
      } else {
        binary_accumulate(*plan, true, ga, [&](std::size_t o, std::size_t) { return g[o]; });
      }
    }
    if (double* gb = grad_of(nb)) {
      if (kind == BinaryKind::mul) {
        const double* A = na->data.data();
        binary_accumulate(*plan, false, gb, [&](std::size_t o, std::size_t k) { return g[o] * A[k]; });
      } else if (kind == BinaryKind::sub) {
        binary_accumulate(*plan, false, gb, [&](std::size_t o, std::size_t) { return -g[o]; });
      } else {
        binary_accumulate(*plan, false, gb, [&](std::size_t o, std::size_t) { return g[o]; });
      }
    }
  });
}

template <class Fn, class Deriv>
Value map_unary(const Value& x, const char* name, Fn fn, Deriv deriv_from_in_out) {
  const auto in = x.data();
  std::vector<double> data(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) data[i] = fn(in[i]);
  return make_result(x.shape(), std::move(data), name, {x.node()}, [deriv_from_in_out](Node& self) {
    const NodePtr& nx = self.inputs[0];
    double* gx = grad_of(nx);
    if (!gx) return;
    const double* g = self.grad.data();
    const double* xin = nx->data.data();
    const double* y = self.data.data();
    const std::size_t n = self.data.size();
    for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * deriv_from_in_out(xin[i], y[i]);
  });
}

void check_axis(const Value& x, std::size_t axis, const char* op) {
  if (axis >= x.rank()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " +
                         x.shape().str());
  }
}

}  // namespace

Value add(const Value& a, const Value& b) { return binary(a, b, BinaryKind::add); }
Value sub(const Value& a, const Value& b) { return binary(a, b, BinaryKind::sub); }
Value mul(const Value& a, const Value& b) { return binary(a, b, BinaryKind::mul); }

Value tanh(const Value& x) {
  return map_unary(
      x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Value relu(const Value& x) {
  return map_unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Value scale(const Value& x, double factor) {
  return map_unary(
      x, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Value unary(const Value& x, std::function<double(double)> fn, std::function<double(double)> derivative,
            const char* name) {
  return map_unary(
      x, name, [&fn](double v) { return fn(v); },
      [derivative = std::move(derivative)](double in, double) { return derivative(in); });
}

Value elementwise(ElementwiseOp op, const Value& a, const Value& b, double factor) {
  switch (op) {
    case ElementwiseOp::add:
      return add(a, b);
    case ElementwiseOp::sub:
      return sub(a, b);
    case ElementwiseOp::mul:
      return mul(a, b);
    case ElementwiseOp::tanh:
      return tanh(a);
    case ElementwiseOp::relu:
      return relu(a);
    case ElementwiseOp::scale:
      return scale(a, factor);
  }
  throw ContractError("unknown elementwise op");
}

// ---------------------------------------------------------------------------
// Softmax and reductions

Value softmax(const Value& x, std::size_t axis) {
  check_axis(x, axis, "softmax");
  const auto s = split_axis(x.shape().dims(), axis);
  const double* in = x.data().data();
  std::vector<double> out(x.numel());
  std::vector<double> mx(s.inner);
  std::vector<double> sum(s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    const std::size_t base = o * s.len * s.inner;
    std::fill(mx.begin(), mx.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < s.len; ++a) {
      const double* row = in + base + a * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) mx[i] = std::max(mx[i], row[i]);
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t a = 0; a < s.len; ++a) {
      const double* row = in + base + a * s.inner;
      double* dst = out.data() + base + a * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) {
        dst[i] = std::exp(row[i] - mx[i]);
        sum[i] += dst[i];
      }
    }
    for (std::size_t a = 0; a < s.len; ++a) {
      double* dst = out.data() + base + a * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] /= sum[i];
    }
  }
  return make_result(x.shape(), std::move(out), "softmax", {x.node()}, [s](Node& self) {
    double* gx = grad_of(self.inputs[0]);
    if (!gx) return;
    const double* g = self.grad.data();
    const double* y = self.data.data();
    std::vector<double> dot(s.inner);
    for (std::size_t o = 0; o < s.outer; ++o) {
      const std::size_t base = o * s.len * s.inner;
      std::fill(dot.begin(), dot.end(), 0.0);
      for (std::size_t a = 0; a < s.len; ++a) {
        const std::size_t off = base + a * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dot[i] += g[off + i] * y[off + i];
      }
      for (std::size_t a = 0; a < s.len; ++a) {
        const std::size_t off = base + a * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) gx[off + i] += y[off + i] * (g[off + i] - dot[i]);
      }
    }
  });
}

Value softmax_weighted_sum(const Value& scores, const Value& values, std::size_t axis) {
  check_axis(scores, axis, "softmax_weighted_sum");
  if (scores.shape() != values.shape()) {
    throw DimensionError("softmax_weighted_sum: scores " + scores.shape().str() + " and values " +
                         values.shape().str() + " differ");
  }
  const auto s = split_axis(scores.shape().dims(), axis);
  std::vector<std::size_t> dims = scores.shape().dims();
  dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(axis));
  const double* in = scores.data().data();
  const double* v = values.data().data();
  auto weights = std::make_shared<std::vector<double>>(scores.numel());
  std::vector<double> out(s.outer * s.inner, 0.0);
  std::vector<double> mx(s.inner);
  std::vector<double> sum(s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    const std::size_t base = o * s.len * s.inner;
    double* w = weights->data() + base;
    double* dst = out.data() + o * s.inner;
    std::fill(mx.begin(), mx.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t a = 0; a < s.len; ++a) {
      const double* row = in + base + a * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) mx[i] = std::max(mx[i], row[i]);
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t a = 0; a < s.len; ++a) {
      const double* row = in + base + a * s.inner;
      double* wr = w + a * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) {
        wr[i] = std::exp(row[i] - mx[i]);
        sum[i] += wr[i];
      }
    }
    for (std::size_t i = 0; i < s.inner; ++i) sum[i] = 1.0 / sum[i];
    for (std::size_t a = 0; a < s.len; ++a) {
      double* wr = w + a * s.inner;
      const double* vr = v + base + a * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) {
        wr[i] *= sum[i];
        dst[i] += wr[i] * vr[i];
      }
    }
  }
  // d out / d s = a (v - out), d out / d v = a, per slice along the axis.
  return make_result(Shape(std::move(dims)), std::move(out), "softmax_weighted_sum", {scores.node(), values.node()},
                     [s, weights](Node& self) {
                       double* gs = grad_of(self.inputs[0]);
                       double* gv = grad_of(self.inputs[1]);
                       const double* v = self.inputs[1]->data.data();
                       const double* g = self.grad.data();
                       const double* y = self.data.data();
                       for (std::size_t o = 0; o < s.outer; ++o) {
                         const std::size_t base = o * s.len * s.inner;
                         const double* go = g + o * s.inner;
                         const double* yo = y + o * s.inner;
                         for (std::size_t a = 0; a < s.len; ++a) {
                           const std::size_t off = base + a * s.inner;
                           const double* w = weights->data() + off;
                           if (gs) {
                             for (std::size_t i = 0; i < s.inner; ++i) gs[off + i] += w[i] * go[i] * (v[off + i] - yo[i]);
                           }
                           if (gv) {
                             for (std::size_t i = 0; i < s.inner; ++i) gv[off + i] += w[i] * go[i];
                           }
                         }
                       }
                     });
}

Value reduce(const Value& x, std::size_t axis, Reduction kind, bool keepdims) {
  check_axis(x, axis, "reduce");
  const auto s = split_axis(x.shape().dims(), axis);
  std::vector<std::size_t> dims = x.shape().dims();
  if (keepdims) {
    dims[axis] = 1;
  } else {
    dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  const double* in = x.data().data();
  std::vector<double> out(s.outer * s.inner, 0.0);
  std::shared_ptr<std::vector<std::size_t>> argmax;
  const char* name = "sum";
  if (kind == Reduction::max) {
    name = "max";
    argmax = std::make_shared<std::vector<std::size_t>>(out.size(), 0);
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = out.data() + o * s.inner;
      std::size_t* arg = argmax->data() + o * s.inner;
      const double* first = in + o * s.len * s.inner;
      std::copy(first, first + s.inner, dst);
      for (std::size_t a = 1; a < s.len; ++a) {
        const double* row = first + a * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) {
          if (row[i] > dst[i]) {  // strict: ties keep the lowest index
            dst[i] = row[i];
            arg[i] = a;
          }
        }
      }
    }
  } else {
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = out.data() + o * s.inner;
      for (std::size_t a = 0; a < s.len; ++a) {
        const double* row = in + (o * s.len + a) * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dst[i] += row[i];
      }
    }
    if (kind == Reduction::mean) {
      name = "mean";
      const double inv = 1.0 / static_cast<double>(s.len);
      for (double& v : out) v *= inv;
    }
  }
  return make_result(Shape(std::move(dims)), std::move(out), name, {x.node()},
                     [s, kind, argmax](Node& self) {
                       double* gx = grad_of(self.inputs[0]);
                       if (!gx) return;
                       const double* g = self.grad.data();
                       if (kind == Reduction::max) {
                         for (std::size_t o = 0; o < s.outer; ++o) {
                           for (std::size_t i = 0; i < s.inner; ++i) {
                             const std::size_t a = (*argmax)[o * s.inner + i];
                             gx[(o * s.len + a) * s.inner + i] += g[o * s.inner + i];
                           }
                         }
                         return;
                       }
                       const double w = kind == Reduction::mean ? 1.0 / static_cast<double>(s.len) : 1.0;
                       for (std::size_t o = 0; o < s.outer; ++o) {
                         const double* go = g + o * s.inner;
                         for (std::size_t a = 0; a < s.len; ++a) {
                           double* dst = gx + (o * s.len + a) * s.inner;
                           for (std::size_t i = 0; i < s.inner; ++i) dst[i] += w * go[i];
                         }
                       }
                     });
}

Value sum_all(const Value& x) {
  const auto in = x.data();
  double acc = 0.0;
  for (double v : in) acc += v;
  return make_result(Shape{}, {acc}, "sum_all", {x.node()}, [](Node& self) {
    const NodePtr& nx = self.inputs[0];
    double* gx = grad_of(nx);
    if (!gx) return;
    const double g = self.grad[0];
    for (std::size_t i = 0; i < nx->data.size(); ++i) gx[i] += g;
  });
}

// ---------------------------------------------------------------------------
// Layout

Value reshape(const Value& x, Shape shape) {
  if (shape.numel() != x.numel()) {
    throw DimensionError("cannot reshape " + x.shape().str() + " to " + shape.str());
  }
  std::vector<double> data(x.data().begin(), x.data().end());
  return make_result(std::move(shape), std::move(data), "reshape", {x.node()}, [](Node& self) {
    double* gx = grad_of(self.inputs[0]);
    if (!gx) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
  });
}

Value broadcast_to(const Value& x, Shape shape) {
  if (broadcast_shapes(x.shape(), shape) != shape) {
    throw DimensionError("cannot broadcast " + x.shape().str() + " to " + shape.str());
  }
  auto plan = std::make_shared<BroadcastPlan>(make_plan(x.shape(), Shape{}, shape));
  std::vector<double> data(shape.numel());
  const double zero = 0.0;
  binary_forward(*plan, x.data().data(), &zero, data.data(), [](double v, double) { return v; });
  return make_result(std::move(shape), std::move(data), "broadcast_to", {x.node()}, [plan](Node& self) {
    double* gx = grad_of(self.inputs[0]);
    if (!gx) return;
    const double* g = self.grad.data();
    binary_accumulate(*plan, true, gx, [g](std::size_t o, std::size_t) { return g[o]; });
  });
}

Value transpose(const Value& x) {
  if (x.rank() < 2) throw DimensionError("transpose needs rank >= 2, got " + x.shape().str());
  std::vector<std::size_t> dims = x.shape().dims();
  const std::size_t r = dims.size();
  const std::size_t m = dims[r - 2];
  const std::size_t n = dims[r - 1];
  std::swap(dims[r - 2], dims[r - 1]);
  const std::size_t batches = x.numel() / (m * n);
  const double* in = x.data().data();
  std::vector<double> out(x.numel());
  for (std::size_t b = 0; b < batches; ++b) {
    const double* src = in + b * m * n;
    double* dst = out.data() + b * m * n;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  }
  return make_result(Shape(std::move(dims)), std::move(out), "transpose", {x.node()},
                     [m, n, batches](Node& self) {
                       double* gx = grad_of(self.inputs[0]);
                       if (!gx) return;
                       const double* g = self.grad.data();
                       for (std::size_t b = 0; b < batches; ++b) {
                         const double* src = g + b * m * n;
                         double* dst = gx + b * m * n;
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < n; ++j) dst[i * n + j] += src[j * m + i];
                       }
                     });
}

Value concat(std::span<const Value> parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of zero values");
  const Shape& first = parts[0].shape();
  if (axis >= first.rank()) throw DimensionError("concat axis out of range for " + first.str());
  std::vector<std::size_t> dims = first.dims();
  dims[axis] = 0;
  std::vector<std::size_t> widths;  // per part: extent(axis) * inner
  std::vector<NodePtr> inputs;
  for (const Value& p : parts) {
    if (p.rank() != first.rank()) {
      throw DimensionError("concat rank mismatch: " + first.str() + " vs " + p.shape().str());
    }
    for (std::size_t i = 0; i < first.rank(); ++i) {
      if (i != axis && p.shape()[i] != first[i]) {
        throw DimensionError("concat extent mismatch: " + first.str() + " vs " + p.shape().str());
      }
    }
    dims[axis] += p.shape()[axis];
    inputs.push_back(p.node());
  }
  const auto s = split_axis(first.dims(), axis);
  for (const Value& p : parts) widths.push_back(p.shape()[axis] * s.inner);
  std::size_t row = 0;
  for (std::size_t w : widths) row += w;
  std::vector<double> out(s.outer * row);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::size_t offset = o * row;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const double* src = parts[k].data().data() + o * widths[k];
      std::copy(src, src + widths[k], out.data() + offset);
      offset += widths[k];
    }
  }
  return make_result(Shape(std::move(dims)), std::move(out), "concat", std::move(inputs),
                     [widths, row, outer = s.outer](Node& self) {
                       const double* g = self.grad.data();
                       for (std::size_t o = 0; o < outer; ++o) {
                         std::size_t offset = o * row;
                         for (std::size_t k = 0; k < widths.size(); ++k) {
                           if (double* gk = grad_of(self.inputs[k])) {
                             double* dst = gk + o * widths[k];
                             for (std::size_t i = 0; i < widths[k]; ++i) dst[i] += g[offset + i];
                           }
                           offset += widths[k];
                         }
                       }
                     });
}

Value concat(std::initializer_list<Value> parts, std::size_t axis) {
  return concat(std::span<const Value>(parts.begin(), parts.size()), axis);
}

Value slice(const Value& x, std::size_t axis, std::size_t begin, std::size_t end) {
  check_axis(x, axis, "slice");
  if (begin >= end || end > x.shape()[axis]) {
    throw BoundsError("slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") out of range for " +
                      x.shape().str() + " axis " + std::to_string(axis));
  }
  const auto s = split_axis(x.shape().dims(), axis);
  std::vector<std::size_t> dims = x.shape().dims();
  dims[axis] = end - begin;
  const std::size_t src_row = s.len * s.inner;
  const std::size_t dst_row = (end - begin) * s.inner;
  const std::size_t start = begin * s.inner;
  std::vector<double> out(s.outer * dst_row);
  const double* in = x.data().data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy(in + o * src_row + start, in + o * src_row + start + dst_row, out.data() + o * dst_row);
  }
  return make_result(Shape(std::move(dims)), std::move(out), "slice", {x.node()},
                     [outer = s.outer, src_row, dst_row, start](Node& self) {
                       double* gx = grad_of(self.inputs[0]);
                       if (!gx) return;
                       const double* g = self.grad.data();
                       for (std::size_t o = 0; o < outer; ++o) {
                         double* dst = gx + o * src_row + start;
                         const double* src = g + o * dst_row;
                         for (std::size_t i = 0; i < dst_row; ++i) dst[i] += src[i];
                       }
                     });
}

// ---------------------------------------------------------------------------
// Indexing and loss

Value gather(const Value& x, const IndexTable& idx) {
  if (x.rank() != 2) throw DimensionError("gather expects [N, d] input, got " + x.shape().str());
  const std::size_t n = x.shape()[0];
  const std::size_t d = x.shape()[1];
  for (std::size_t id : idx.ids) {
    if (id >= n) {
      throw BoundsError("gather index " + std::to_string(id) + " out of range for " + std::to_string(n) +
                        " rows");
    }
  }
  if (idx.rows == 0 || idx.cols == 0) throw DimensionError("gather with an empty index table");
  auto ids = std::make_shared<std::vector<std::size_t>>(idx.ids);
  std::vector<double> out(ids->size() * d);
  const double* in = x.data().data();
  for (std::size_t e = 0; e < ids->size(); ++e) {
    std::copy(in + (*ids)[e] * d, in + (*ids)[e] * d + d, out.data() + e * d);
  }
  return make_result(Shape{idx.rows, idx.cols, d}, std::move(out), "gather", {x.node()}, [ids, d](Node& self) {
    double* gx = grad_of(self.inputs[0]);
    if (!gx) return;
    const double* g = self.grad.data();
    for (std::size_t e = 0; e < ids->size(); ++e) {
      double* dst = gx + (*ids)[e] * d;
      const double* src = g + e * d;
      for (std::size_t i = 0; i < d; ++i) dst[i] += src[i];
    }
  });
}

Value pairwise_softmax_sum(const Value& score_center, const Value& score_neighbor, const Value& value_center,
                           const Value& value_neighbor, const IndexTable& idx) {
  if (score_neighbor.rank() != 2 || value_neighbor.shape() != score_neighbor.shape()) {
    throw DimensionError("pairwise_softmax_sum: neighbor scores " + score_neighbor.shape().str() +
                         " and values " + value_neighbor.shape().str() + " must be matching [M, d]");
  }
  const std::size_t m = score_neighbor.shape()[0];
  const std::size_t d = score_neighbor.shape()[1];
  const std::size_t n = idx.rows;
  const std::size_t k = idx.cols;
  if (n == 0 || k == 0) throw DimensionError("pairwise_softmax_sum with an empty index table");
  for (const Value* c : {&score_center, &value_center}) {
    if (c->defined() && c->shape() != Shape{n, d}) {
      throw DimensionError("pairwise_softmax_sum: center " + c->shape().str() + " does not match [" +
                           std::to_string(n) + ", " + std::to_string(d) + "]");
    }
  }
  for (std::size_t id : idx.ids) {
    if (id >= m) {
      throw BoundsError("pairwise_softmax_sum index " + std::to_string(id) + " out of range for " +
                        std::to_string(m) + " rows");
    }
  }
  auto ids = std::make_shared<std::vector<std::size_t>>(idx.ids);
  auto weights = std::make_shared<std::vector<double>>(n * k * d);
  std::vector<double> out(n * d, 0.0);
  const double* vc = value_center.defined() ? value_center.data().data() : nullptr;
  const double* sn = score_neighbor.data().data();
  const double* vn = value_neighbor.data().data();
  std::vector<double> mx(d);
  std::vector<double> sum(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t* row = ids->data() + i * k;
    double* w = weights->data() + i * k * d;
    double* dst = out.data() + i * d;
    std::fill(mx.begin(), mx.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < k; ++j) {
      const double* s = sn + row[j] * d;
      for (std::size_t c = 0; c < d; ++c) mx[c] = std::max(mx[c], s[c]);
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double* s = sn + row[j] * d;
      double* wr = w + j * d;
      for (std::size_t c = 0; c < d; ++c) {
        wr[c] = std::exp(s[c] - mx[c]);
        sum[c] += wr[c];
      }
    }
    for (std::size_t c = 0; c < d; ++c) sum[c] = 1.0 / sum[c];
    for (std::size_t j = 0; j < k; ++j) {
      double* wr = w + j * d;
      const double* v = vn + row[j] * d;
      for (std::size_t c = 0; c < d; ++c) {
        wr[c] *= sum[c];
        dst[c] += wr[c] * v[c];
      }
    }
    if (vc) {
      for (std::size_t c = 0; c < d; ++c) dst[c] += vc[i * d + c];
    }
  }

  // The score center is constant along j, so it cancels in the softmax and
  // receives no gradient.
  std::vector<NodePtr> inputs{score_neighbor.node(), value_neighbor.node()};
  const bool has_vc = value_center.defined();
  if (has_vc) inputs.push_back(value_center.node());
  return make_result(Shape{n, d}, std::move(out), "pairwise_softmax_sum", std::move(inputs),
                     [ids, weights, n, k, d, has_vc](Node& self) {
                       double* gsn = grad_of(self.inputs[0]);
                       double* gvn = grad_of(self.inputs[1]);
                       double* gvc = has_vc ? grad_of(self.inputs[2]) : nullptr;
                       const double* vn = self.inputs[1]->data.data();
                       const double* vc = has_vc ? self.inputs[2]->data.data() : nullptr;
                       const double* g = self.grad.data();
                       const double* y = self.data.data();
                       std::vector<double> resid(d);
                       for (std::size_t i = 0; i < n; ++i) {
                         const std::size_t* row = ids->data() + i * k;
                         const double* w = weights->data() + i * k * d;
                         const double* gi = g + i * d;
                         // v_ij - out_i = vn_j - (out_i - vc_i)
                         for (std::size_t c = 0; c < d; ++c) resid[c] = y[i * d + c] - (vc ? vc[i * d + c] : 0.0);
                         for (std::size_t j = 0; j < k; ++j) {
                           const double* wr = w + j * d;
                           const double* v = vn + row[j] * d;
                           if (gvn) {
                             double* dst = gvn + row[j] * d;
                             for (std::size_t c = 0; c < d; ++c) dst[c] += wr[c] * gi[c];
                           }
                           if (gsn) {
                             double* dst = gsn + row[j] * d;
                             for (std::size_t c = 0; c < d; ++c) dst[c] += wr[c] * gi[c] * (v[c] - resid[c]);
                           }
                         }
                         if (gvc) {
                           for (std::size_t c = 0; c < d; ++c) gvc[i * d + c] += gi[c];
                         }
                       }
                     });
}

Value cross_entropy(const Value& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 1 && logits.rank() != 2) {
    throw DimensionError("cross_entropy expects [C] or [M, C] logits, got " + logits.shape().str());
  }
  const std::size_t m = logits.rank() == 1 ? 1 : logits.shape()[0];
  const std::size_t c = logits.shape().back();
  if (labels.size() != m) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(m) + " rows");
  }
  auto probs = std::make_shared<std::vector<double>>(m * c);
  auto lab = std::make_shared<std::vector<std::size_t>>(labels.begin(), labels.end());
  const double* z = logits.data().data();
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if ((*lab)[r] >= c) {
      throw BoundsError("label " + std::to_string((*lab)[r]) + " out of range for " + std::to_string(c) +
                        " classes");
    }
    const double* row = z + r * c;
    const double mx = *std::max_element(row, row + c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(row[k] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t k = 0; k < c; ++k) (*probs)[r * c + k] = std::exp(row[k] - lse);
    loss += lse - row[(*lab)[r]];
  }
  loss /= static_cast<double>(m);
  return make_result(Shape{}, {loss}, "cross_entropy", {logits.node()}, [probs, lab, m, c](Node& self) {
    double* gz = grad_of(self.inputs[0]);
    if (!gz) return;
    const double w = self.grad[0] / static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t k = 0; k < c; ++k) {
        const double target = k == (*lab)[r] ? 1.0 : 0.0;
        gz[r * c + k] += w * ((*probs)[r * c + k] - target);
      }
    }
  });
}

}  // namespace pcattn::numerics
