#include "pcattn/framework/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcattn/errors.hpp"

namespace pcattn::framework {

using namespace numerics;

namespace {

double squared_distance(const pcio::Vec3& a, const pcio::Vec3& b) {
  const double x = a[0] - b[0];
  const double y = a[1] - b[1];
  const double z = a[2] - b[2];
  return x * x + y * y + z * z;
}

}  // namespace

std::vector<std::size_t> farthest_point_sample(const std::vector<pcio::Vec3>& points, std::size_t m) {
  const std::size_t n = points.size();
  if (m > n) {
    throw ContractError("farthest_point_sample: asked for " + std::to_string(m) + " of " + std::to_string(n) +
                        " points");
  }
  std::vector<std::size_t> chosen;
  if (m == 0) return chosen;
  pcio::Vec3 centroid{0.0, 0.0, 0.0};
  for (const auto& p : points)
    for (int a = 0; a < 3; ++a) centroid[a] += p[a];
  for (double& c : centroid) c /= static_cast<double>(n);

  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = squared_distance(points[i], centroid);
    if (dist < best) {
      best = dist;
      start = i;
    }
  }
  chosen.reserve(m);
  chosen.push_back(start);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  taken[start] = true;
  std::size_t last = start;
  while (chosen.size() < m) {
    std::size_t next = n;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i], squared_distance(points[i], points[last]));
      if (min_dist[i] > far) {
        far = min_dist[i];
        next = i;
      }
    }
    taken[next] = true;
    chosen.push_back(next);
    last = next;
  }
  return chosen;
}

Interpolation interpolation_weights(const std::vector<pcio::Vec3>& coarse, const std::vector<pcio::Vec3>& fine) {
  if (coarse.empty()) throw ContractError("interpolation needs at least one coarse point");
  const std::size_t n = fine.size();
  const std::size_t cols = std::min<std::size_t>(3, coarse.size());
  Interpolation out;
  out.ids = IndexTable(n, cols);
  out.weights.assign(n * cols, 0.0);
  std::vector<std::size_t> order(coarse.size());
  std::vector<double> dist(coarse.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < coarse.size(); ++j) {
      dist[j] = squared_distance(fine[i], coarse[j]);
      order[j] = j;
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cols), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      out.ids.at(i, c) = order[c];
      const double w = dist[order[0]] == 0.0 ? (c == 0 ? 1.0 : 0.0) : 1.0 / (std::sqrt(dist[order[c]]) + 1e-8);
      out.weights[i * cols + c] = w;
      total += w;
    }
    for (std::size_t c = 0; c < cols; ++c) out.weights[i * cols + c] /= total;
  }
  return out;
}

Value interpolate_upsample(const Value& coarse_features, const std::vector<pcio::Vec3>& coarse,
                           const std::vector<pcio::Vec3>& fine) {
  if (coarse_features.rank() != 2 || coarse_features.shape()[0] != coarse.size()) {
    throw DimensionError("coarse features " + coarse_features.shape().str() + " do not match " +
                         std::to_string(coarse.size()) + " coarse points");
  }
  const Interpolation w = interpolation_weights(coarse, fine);
  const Value weights = Value::constant(Shape{fine.size(), w.ids.cols, 1}, w.weights);
  return reduce(mul(gather(coarse_features, w.ids), weights), 1, Reduction::sum);
}

}  // namespace pcattn::framework
