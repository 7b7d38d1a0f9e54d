#include <Eigen/Core>

#include "graph.hpp"
#include "pcattn/errors.hpp"
#include "pcattn/numerics/ops.hpp"

namespace pcattn::numerics {

using internal::grad_of;
using internal::make_result;
using internal::Node;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void mismatch(const Value& a, const Value& b) {
  throw DimensionError("matmul: incompatible shapes " + a.shape().str() + " and " + b.shape().str());
}

// Every row of `a` times the matrix `b`: [..., p] x [p, n] -> [..., n].
Value matmul_rows(const Value& a, const Value& b) {
  const std::size_t p = b.shape()[0];
  const std::size_t n = b.shape()[1];
  if (a.shape().back() != p) mismatch(a, b);
  const std::size_t m = a.numel() / p;
  std::vector<std::size_t> dims = a.shape().dims();
  dims.back() = n;
  std::vector<double> out(m * n);
  MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, p) * ConstMap(b.data().data(), p, n);
  return make_result(Shape(std::move(dims)), std::move(out), "matmul", {a.node(), b.node()},
                     [m, p, n](Node& self) {
                       ConstMap g(self.grad.data(), m, n);
                       const auto& na = self.inputs[0];
                       const auto& nb = self.inputs[1];
                       if (double* ga = grad_of(na)) {
                         MutMap(ga, m, p).noalias() += g * ConstMap(nb->data.data(), p, n).transpose();
                       }
                       if (double* gb = grad_of(nb)) {
                         MutMap(gb, p, n).noalias() += ConstMap(na->data.data(), m, p).transpose() * g;
                       }
                     });
}

}  // namespace

Value matmul(const Value& a, const Value& b) {
  if (b.rank() == 2 && a.rank() >= 1) return matmul_rows(a, b);
  if (a.rank() < 2 || b.rank() < 2) mismatch(a, b);

  const auto& ad = a.shape().dims();
  const auto& bd = b.shape().dims();
  const std::size_t m = ad[ad.size() - 2];
  const std::size_t p = ad.back();
  const std::size_t n = bd.back();
  if (bd[bd.size() - 2] != p) mismatch(a, b);

  const Shape a_batch(std::vector<std::size_t>(ad.begin(), ad.end() - 2));
  const Shape b_batch(std::vector<std::size_t>(bd.begin(), bd.end() - 2));
  Shape batch;
  try {
    batch = broadcast_shapes(a_batch, b_batch);
  } catch (const DimensionError&) {
    mismatch(a, b);
  }

  // Matrix offsets of each broadcast batch entry into a and b.
  const std::size_t count = batch.numel();
  std::vector<std::size_t> a_off(count);
  std::vector<std::size_t> b_off(count);
  {
    const std::size_t r = batch.rank();
    auto strides_for = [&](const Shape& s) {
      std::vector<std::size_t> st(r, 0);
      std::size_t stride = 1;
      for (std::size_t i = r; i-- > 0;) {
        const std::size_t off = r - s.rank();
        if (i < off) continue;
        const std::size_t d = s[i - off];
        st[i] = d == 1 ? 0 : stride;
        stride *= d;
      }
      return st;
    };
    const auto sa = strides_for(a_batch);
    const auto sb = strides_for(b_batch);
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t t = 0; t < count; ++t) {
      std::size_t ia = 0;
      std::size_t ib = 0;
      for (std::size_t i = 0; i < r; ++i) {
        ia += idx[i] * sa[i];
        ib += idx[i] * sb[i];
      }
      a_off[t] = ia * m * p;
      b_off[t] = ib * p * n;
      for (std::size_t i = r; i-- > 0;) {
        if (++idx[i] < batch[i]) break;
        idx[i] = 0;
      }
    }
  }

  std::vector<std::size_t> dims = batch.dims();
  dims.push_back(m);
  dims.push_back(n);
  std::vector<double> out(count * m * n);
  for (std::size_t t = 0; t < count; ++t) {
    MutMap(out.data() + t * m * n, m, n).noalias() =
        ConstMap(a.data().data() + a_off[t], m, p) * ConstMap(b.data().data() + b_off[t], p, n);
  }
  return make_result(Shape(std::move(dims)), std::move(out), "matmul", {a.node(), b.node()},
                     [m, p, n, a_off = std::move(a_off), b_off = std::move(b_off)](Node& self) {
                       const auto& na = self.inputs[0];
                       const auto& nb = self.inputs[1];
                       double* ga = grad_of(na);
                       double* gb = grad_of(nb);
                       for (std::size_t t = 0; t < a_off.size(); ++t) {
                         ConstMap g(self.grad.data() + t * m * n, m, n);
                         if (ga) {
                           MutMap(ga + a_off[t], m, p).noalias() +=
                               g * ConstMap(nb->data.data() + b_off[t], p, n).transpose();
                         }
                         if (gb) {
                           MutMap(gb + b_off[t], p, n).noalias() +=
                               ConstMap(na->data.data() + a_off[t], m, p).transpose() * g;
                         }
                       }
                     });
}

}  // namespace pcattn::numerics
