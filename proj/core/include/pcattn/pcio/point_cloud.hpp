#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace pcattn::pcio {

using Vec3 = std::array<double, 3>;

/// N x 3 positions with optional per-point part labels and a class label.
struct PointCloud {
  std::vector<Vec3> positions;
  std::optional<std::vector<std::uint32_t>> part_labels;
  std::optional<std::uint32_t> class_label;

  std::size_t size() const noexcept { return positions.size(); }
  /// Throws ContractError unless N >= 1, coordinates are finite and part
  /// labels (when present) cover every point.
  void validate() const;

  bool operator==(const PointCloud&) const = default;
};

using Dataset = std::vector<PointCloud>;

/// Centroid to the origin, largest norm to 1. A cloud of coincident points
/// is only centred.
PointCloud normalize_unit_sphere(PointCloud pc);

}  // namespace pcattn::pcio
