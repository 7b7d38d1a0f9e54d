#include "pcattn/pcio/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pcattn/seed.hpp"

namespace pcattn::pcio {

std::string_view to_string(Augmentation a) {
  switch (a) {
    case Augmentation::jitter: return "jitter";
    case Augmentation::rotate: return "rotate";
    case Augmentation::translate: return "translate";
    case Augmentation::aniso_scale: return "aniso_scale";
  }
  return "?";
}

std::optional<Augmentation> parse_augmentation(std::string_view name) {
  for (Augmentation a : all_augmentations()) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<Augmentation> all_augmentations() {
  return {Augmentation::jitter, Augmentation::rotate, Augmentation::translate, Augmentation::aniso_scale};
}

PointCloud augment(const PointCloud& pc, std::span<const Augmentation> ops, std::uint64_t seed,
                   const AugmentParams& params) {
  auto has = [&](Augmentation a) { return std::find(ops.begin(), ops.end(), a) != ops.end(); };
  PointCloud out = pc;
  // Each op draws from its own stream so enabling one op never changes another.
  if (has(Augmentation::aniso_scale)) {
    std::mt19937_64 rng(mix_seed(seed, 0));
    std::uniform_real_distribution<double> dist(params.scale_low, params.scale_high);
    const Vec3 s{dist(rng), dist(rng), dist(rng)};
    for (Vec3& p : out.positions)
      for (int a = 0; a < 3; ++a) p[a] *= s[a];
  }
  if (has(Augmentation::rotate)) {
    std::mt19937_64 rng(mix_seed(seed, 1));
    std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
    const double theta = dist(rng);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (Vec3& p : out.positions) {
      const double x = p[0];
      const double y = p[1];
      p[0] = c * x - s * y;
      p[1] = s * x + c * y;
    }
  }
  if (has(Augmentation::translate)) {
    std::mt19937_64 rng(mix_seed(seed, 2));
    std::uniform_real_distribution<double> dist(-params.translate_range, params.translate_range);
    const Vec3 t{dist(rng), dist(rng), dist(rng)};
    for (Vec3& p : out.positions)
      for (int a = 0; a < 3; ++a) p[a] += t[a];
  }
  if (has(Augmentation::jitter)) {
    std::mt19937_64 rng(mix_seed(seed, 3));
    std::normal_distribution<double> dist(0.0, params.jitter_sigma);
    for (Vec3& p : out.positions)
      for (double& c : p) c += std::clamp(dist(rng), -params.jitter_clip, params.jitter_clip);
  }
  return out;
}

}  // namespace pcattn::pcio
