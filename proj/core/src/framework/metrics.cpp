#include "pcattn/framework/metrics.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "pcattn/errors.hpp"

namespace pcattn::framework {

Metrics classification_metrics(std::span<const std::size_t> predicted, std::span<const std::size_t> labels) {
  if (predicted.size() != labels.size()) {
    throw ContractError("classification_metrics: " + std::to_string(predicted.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ContractError("classification_metrics: no samples");
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> per_class;  // label -> (correct, support)
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& [hit, support] = per_class[labels[i]];
    ++support;
    if (predicted[i] == labels[i]) {
      ++hit;
      ++correct;
    }
  }
  double acc_sum = 0.0;
  for (const auto& [label, hs] : per_class) acc_sum += static_cast<double>(hs.first) / static_cast<double>(hs.second);
  Metrics m;
  m.overall_accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  m.mean_class_accuracy = acc_sum / static_cast<double>(per_class.size());
  return m;
}

double shape_iou(std::span<const std::size_t> predicted, std::span<const std::size_t> labels,
                 std::span<const std::size_t> parts) {
  if (predicted.size() != labels.size()) throw ContractError("shape_iou: prediction and label lengths differ");
  if (parts.empty()) throw ContractError("shape_iou: no parts");
  double sum = 0.0;
  for (std::size_t part : parts) {
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool p = predicted[i] == part;
      const bool l = labels[i] == part;
      inter += (p && l) ? 1 : 0;
      uni += (p || l) ? 1 : 0;
    }
    sum += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return sum / static_cast<double>(parts.size());
}

Metrics segmentation_metrics(const std::vector<std::vector<std::size_t>>& predicted,
                             const std::vector<std::vector<std::size_t>>& labels,
                             std::span<const std::size_t> categories,
                             const std::vector<std::vector<std::size_t>>& category_parts) {
  if (predicted.size() != labels.size() || categories.size() != labels.size()) {
    throw ContractError("segmentation_metrics: shape counts disagree");
  }
  if (labels.empty()) throw ContractError("segmentation_metrics: no shapes");
  std::map<std::size_t, std::pair<double, std::size_t>> per_category;
  double iou_sum = 0.0;
  std::size_t points = 0;
  std::size_t correct = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (predicted[s].size() != labels[s].size()) {
      throw ContractError("segmentation_metrics: shape " + std::to_string(s) + " has mismatched lengths");
    }
    if (categories[s] >= category_parts.size()) {
      throw ContractError("segmentation_metrics: unknown category " + std::to_string(categories[s]));
    }
    const double iou = shape_iou(predicted[s], labels[s], category_parts[categories[s]]);
    iou_sum += iou;
    auto& [sum, count] = per_category[categories[s]];
    sum += iou;
    ++count;
    for (std::size_t i = 0; i < labels[s].size(); ++i) correct += predicted[s][i] == labels[s][i] ? 1 : 0;
    points += labels[s].size();
  }
  double cat_sum = 0.0;
  for (const auto& [c, sc] : per_category) cat_sum += sc.first / static_cast<double>(sc.second);
  Metrics m;
  m.overall_accuracy = points ? static_cast<double>(correct) / static_cast<double>(points) : 0.0;
  m.instance_miou = iou_sum / static_cast<double>(labels.size());
  m.category_miou = cat_sum / static_cast<double>(per_category.size());
  return m;
}

}  // namespace pcattn::framework
