#include "pcattn/pcio/point_cloud.hpp"

#include <cmath>
#include <string>

#include "pcattn/errors.hpp"

namespace pcattn::pcio {

void PointCloud::validate() const {
  if (positions.empty()) throw ContractError("point cloud has no points");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (double c : positions[i]) {
      if (!std::isfinite(c)) throw ContractError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  if (part_labels && part_labels->size() != positions.size()) {
    throw ContractError("part label count " + std::to_string(part_labels->size()) + " != point count " +
                        std::to_string(positions.size()));
  }
}

PointCloud normalize_unit_sphere(PointCloud pc) {
  if (pc.positions.empty()) throw ContractError("cannot normalize an empty point cloud");
  Vec3 centroid{0.0, 0.0, 0.0};
  for (const Vec3& p : pc.positions)
    for (int a = 0; a < 3; ++a) centroid[a] += p[a];
  for (double& c : centroid) c /= static_cast<double>(pc.positions.size());
  double max_norm = 0.0;
  for (Vec3& p : pc.positions) {
    for (int a = 0; a < 3; ++a) p[a] -= centroid[a];
    max_norm = std::max(max_norm, std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
  }
  if (max_norm > 0.0) {
    for (Vec3& p : pc.positions)
      for (double& c : p) c /= max_norm;
  }
  return pc;
}

}  // namespace pcattn::pcio
