#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcattn/pcio/point_cloud.hpp"

namespace pcattn::pcio {

enum class Augmentation { jitter, rotate, translate, aniso_scale };

struct AugmentParams {
  double jitter_sigma = 0.01;
  double jitter_clip = 0.05;
  double translate_range = 0.1;
  double scale_low = 2.0 / 3.0;
  double scale_high = 1.5;
};

std::string_view to_string(Augmentation a);
std::optional<Augmentation> parse_augmentation(std::string_view name);
std::vector<Augmentation> all_augmentations();

/// Applies the selected ops in the fixed order scale, rotate (about z),
/// translate, jitter. Labels are untouched. Pure in (pc, ops, seed).
PointCloud augment(const PointCloud& pc, std::span<const Augmentation> ops, std::uint64_t seed,
                   const AugmentParams& params = {});

}  // namespace pcattn::pcio
