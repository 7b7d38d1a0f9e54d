#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pcattn/pcio/point_cloud.hpp"
#include "pcattn/task.hpp"

namespace pcattn::pcio {

enum class Primitive { sphere, cube, cylinder, plane };

inline constexpr std::size_t kSyntheticClasses = 4;
inline constexpr std::size_t kSyntheticCategories = 2;
inline constexpr std::size_t kSyntheticParts = 2;
inline constexpr std::size_t kMinSyntheticPoints = 16;

/// Canonical (unposed) surface samples: unit sphere, [-1,1]^3 cube, radius-1
/// height-2 closed cylinder, [-1,1]^2 square at z = 0.
std::vector<Vec3> sample_primitive(Primitive kind, std::size_t n, std::mt19937_64& rng);

/// Classification: sample i has class i % 4 over {sphere, cube, cylinder,
/// plane}. Segmentation: sample i has category i % 2, a pin (shaft, cap) or
/// a table (top, leg); part 0 is the first component, part 1 the second and
/// each holds half the points. Every sample gets a random rotation about the
/// z axis and is normalized to the unit sphere.
Dataset gen_synthetic(Task task, std::size_t n_samples, std::size_t n_points, std::uint64_t seed);

}  // namespace pcattn::pcio
