#include "pcattn/pcio/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcattn/errors.hpp"
#include "pcattn/seed.hpp"

namespace pcattn::pcio {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 on_sphere(std::mt19937_64& rng, double r) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-12) return {r * v[0] / n, r * v[1] / n, r * v[2] / n};
  }
}

Vec3 on_cylinder_side(std::mt19937_64& rng, double r, double z_lo, double z_hi) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> height(z_lo, z_hi);
  const double t = angle(rng);
  return {r * std::cos(t), r * std::sin(t), height(rng)};
}

Vec3 on_disk(std::mt19937_64& rng, double r, double z) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rho = r * std::sqrt(unit(rng));
  const double t = 2.0 * kPi * unit(rng);
  return {rho * std::cos(t), rho * std::sin(t), z};
}

/// Random yaw about the up (z) axis; shapes stay upright like pre-aligned
/// benchmark data.
void pose(PointCloud& pc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  const double t = angle(rng);
  const double c = std::cos(t), s = std::sin(t);
  for (Vec3& p : pc.positions) {
    const double x = p[0], y = p[1];
    p[0] = c * x - s * y;
    p[1] = s * x + c * y;
  }
}

PointCloud composite(std::size_t category, std::size_t n, std::mt19937_64& rng) {
  const std::size_t n0 = n / 2;
  PointCloud pc;
  pc.part_labels.emplace();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool first = i < n0;
    Vec3 p{};
    if (category == 0) {
      // Pin: thin shaft with a ball cap on top.
      if (first) {
        p = on_cylinder_side(rng, 0.25, -1.0, 0.45);
      } else {
        p = on_sphere(rng, 0.5);
        p[2] += 0.9;
      }
    } else {
      // Table: square top on a single central leg.
      if (first) {
        p = {2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 0.6};
      } else {
        p = on_cylinder_side(rng, 0.2, -1.0, 0.6);
      }
    }
    pc.positions.push_back(p);
    pc.part_labels->push_back(first ? 0u : 1u);
  }
  return pc;
}

}  // namespace

std::vector<Vec3> sample_primitive(Primitive kind, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case Primitive::sphere:
        pts.push_back(on_sphere(rng, 1.0));
        break;
      case Primitive::cube: {
        // Pick a face uniformly, then a point on it.
        const int face = static_cast<int>(unit(rng) * 6.0) % 6;
        const int axis = face / 2;
        Vec3 p{2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0};
        p[axis] = (face % 2 == 0) ? -1.0 : 1.0;
        pts.push_back(p);
        break;
      }
      case Primitive::cylinder: {
        // Lateral area 4*pi vs. caps 2*pi.
        const double u = unit(rng);
        if (u < 2.0 / 3.0) {
          pts.push_back(on_cylinder_side(rng, 1.0, -1.0, 1.0));
        } else {
          pts.push_back(on_disk(rng, 1.0, u < 5.0 / 6.0 ? -1.0 : 1.0));
        }
        break;
      }
      case Primitive::plane:
        pts.push_back({2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 0.0});
        break;
    }
  }
  return pts;
}

Dataset gen_synthetic(Task task, std::size_t n_samples, std::size_t n_points, std::uint64_t seed) {
  if (n_points < kMinSyntheticPoints) {
    throw ContractError("synthetic samples need at least " + std::to_string(kMinSyntheticPoints) +
                        " points, got " + std::to_string(n_points));
  }
  Dataset data;
  data.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    PointCloud pc;
    if (task == Task::classification) {
      const auto cls = static_cast<std::uint32_t>(i % kSyntheticClasses);
      pc.positions = sample_primitive(static_cast<Primitive>(cls), n_points, rng);
      pc.class_label = cls;
    } else {
      const std::size_t category = i % kSyntheticCategories;
      pc = composite(category, n_points, rng);
      pc.class_label = static_cast<std::uint32_t>(category);
    }
    pose(pc, rng);
    data.push_back(normalize_unit_sphere(std::move(pc)));
  }
  return data;
}

}  // namespace pcattn::pcio
