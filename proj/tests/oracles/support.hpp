#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pcattn/numerics/ops.hpp"
#include "pcattn/pcio/point_cloud.hpp"

namespace oracle {

using pcattn::numerics::Shape;
using pcattn::numerics::Value;

inline std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline Value random_param(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  const auto n = shape.numel();
  return Value::parameter(std::move(shape), uniform(n, rng, lo, hi));
}

inline Value random_const(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  const auto n = shape.numel();
  return Value::constant(std::move(shape), uniform(n, rng, lo, hi));
}

/// Cloud of n points in [-1,1]^3 whose pairwise distances are all distinct
/// (redrawn until they are, so ranking ties never occur).
inline std::vector<pcattn::pcio::Vec3> distinct_cloud(std::size_t n, std::mt19937_64& rng) {
  for (;;) {
    std::vector<pcattn::pcio::Vec3> pts(n);
    for (auto& p : pts) {
      auto u = uniform(3, rng);
      p = {u[0], u[1], u[2]};
    }
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double s = 0;
        for (int c = 0; c < 3; ++c) s += (pts[i][c] - pts[j][c]) * (pts[i][c] - pts[j][c]);
        d.push_back(s);
      }
    }
    std::sort(d.begin(), d.end());
    bool ok = true;
    for (std::size_t i = 1; i < d.size(); ++i) ok = ok && d[i] - d[i - 1] > 1e-9;
    if (ok) return pts;
  }
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
