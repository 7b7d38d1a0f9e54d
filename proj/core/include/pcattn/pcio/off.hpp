#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pcattn/pcio/point_cloud.hpp"

namespace pcattn::pcio {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  bool operator==(const Mesh&) const = default;
};

/// Parses OFF text. The "OFF" header is optional (and may be fused with the
/// counts, as in some ModelNet files); '#' comments and blank lines are
/// skipped; polygons are fan-triangulated. Throws ParseError with the line.
Mesh parse_off(std::string_view text);
Mesh read_off(const std::filesystem::path& path);

/// Emits OFF text that parses back to an identical mesh.
std::string serialize_off(const Mesh& mesh);

/// Area-weighted triangle choice with uniform barycentric coordinates.
PointCloud sample_surface(const Mesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace pcattn::pcio
