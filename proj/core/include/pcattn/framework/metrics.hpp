#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pcattn::framework {

/// Fractions in [0, 1]; fields that do not apply to a task stay empty.
/// For segmentation, overall_accuracy is per point.
struct Metrics {
  std::optional<double> overall_accuracy;
  std::optional<double> mean_class_accuracy;
  std::optional<double> instance_miou;
  std::optional<double> category_miou;
};

Metrics classification_metrics(std::span<const std::size_t> predicted, std::span<const std::size_t> labels);

/// IoU of one shape averaged over `parts`; a part absent from both the
/// labels and the prediction scores 1.
double shape_iou(std::span<const std::size_t> predicted, std::span<const std::size_t> labels,
                 std::span<const std::size_t> parts);

/// `categories[s]` is the category of shape s and `category_parts[c]` the
/// part ids of category c.
Metrics segmentation_metrics(const std::vector<std::vector<std::size_t>>& predicted,
                             const std::vector<std::vector<std::size_t>>& labels,
                             std::span<const std::size_t> categories,
                             const std::vector<std::vector<std::size_t>>& category_parts);

}  // namespace pcattn::framework
