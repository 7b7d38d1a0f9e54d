#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcattn/framework/metrics.hpp"
#include "pcattn/framework/model.hpp"
#include "pcattn/framework/optim.hpp"
#include "pcattn/pcio/point_cloud.hpp"

namespace pcattn::framework {

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  /// OA (classification) or instance mIoU (segmentation) of the training
  /// forward passes of this epoch.
  double train_metric = 0.0;
  std::optional<double> val_metric;
};

struct TrainOptions {
  const pcio::Dataset* validation = nullptr;
  std::function<void(const EpochRecord&)> on_epoch;
  attention::BlockOptions block;
};

/// Mini-batch AdamW with the warmup/cosine schedule. Gradients are averaged
/// over each batch; samples are reshuffled and augmented every epoch.
/// Throws TrainingError on a non-finite loss.
std::vector<EpochRecord> train(Model& model, const pcio::Dataset& data, const TrainConfig& cfg,
                               const TrainOptions& options = {});

/// Per-sample argmax predictions without recording a graph.
std::vector<std::vector<std::size_t>> predict(const Model& model, const pcio::Dataset& data,
                                              const attention::BlockOptions& options = {});

Metrics evaluate(const Model& model, const pcio::Dataset& data, const attention::BlockOptions& options = {});

/// Headline metric of a task: OA or instance mIoU.
double headline_metric(Task task, const Metrics& m);

/// Throws ContractError if a sample lacks the labels the task needs.
void check_labels(const ModelConfig& cfg, const pcio::Dataset& data);

std::string metrics_csv_header();
std::string metrics_csv_row(const EpochRecord& r);

}  // namespace pcattn::framework
