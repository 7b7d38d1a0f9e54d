#pragma once

#include <cstddef>
#include <vector>

#include "pcattn/numerics/ops.hpp"
#include "pcattn/pcio/point_cloud.hpp"

namespace pcattn::framework {

/// Greedy farthest-point subset of size m, in selection order. Starts at the
/// point nearest the centroid; ties go to the lower index.
std::vector<std::size_t> farthest_point_sample(const std::vector<pcio::Vec3>& points, std::size_t m);

/// Up to three nearest coarse points per fine point with normalized
/// inverse-distance weights 1/(dist + 1e-8). A fine point that coincides
/// with a coarse point copies it.
struct Interpolation {
  numerics::IndexTable ids;
  std::vector<double> weights;  // rows x cols, row-major
};

Interpolation interpolation_weights(const std::vector<pcio::Vec3>& coarse, const std::vector<pcio::Vec3>& fine);

/// [M, d] coarse features -> [N, d] at the fine positions.
numerics::Value interpolate_upsample(const numerics::Value& coarse_features, const std::vector<pcio::Vec3>& coarse,
                                     const std::vector<pcio::Vec3>& fine);

}  // namespace pcattn::framework
