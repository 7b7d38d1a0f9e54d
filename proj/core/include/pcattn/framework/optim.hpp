#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcattn/numerics/value.hpp"
#include "pcattn/pcio/augment.hpp"
#include "pcattn/task.hpp"

namespace pcattn::framework {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch = 16;
  double lr_start = 1e-4;
  double lr_end = 1e-8;
  std::size_t warmup_epochs = 10;
  double weight_decay = 1.0;
  std::uint64_t seed = 0;
  std::vector<pcio::Augmentation> augmentations = pcio::all_augmentations();

  bool operator==(const TrainConfig&) const = default;
};

/// Default weight decay: 1 for classification, 1e-4 for segmentation.
double default_weight_decay(Task task);

/// Throws ConfigError on an invalid configuration.
void validate(const TrainConfig& cfg);

/// Linear warmup lr_start * epoch / warmup for epoch < warmup, then cosine
/// annealing from lr_start (at epoch == warmup) to lr_end (final epoch).
double lr_schedule(std::size_t epoch, const TrainConfig& cfg);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One AdamW update of a flat array at step t >= 1. Weight decay is
/// decoupled: p -= lr * wd * p, then the Adam step.
void adamw_update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v,
                  std::uint64_t t, double lr, double weight_decay, const AdamHyper& hyper = {});

/// Moment buffers for a fixed list of parameters.
class AdamW {
 public:
  AdamW(std::vector<numerics::Value> params, AdamHyper hyper = {});

  /// Applies one update using the parameters' accumulated grads (missing
  /// grads count as zero), then clears the grads.
  void step(double lr, double weight_decay);

  std::uint64_t steps() const { return t_; }

 private:
  std::vector<numerics::Value> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamHyper hyper_;
  std::uint64_t t_ = 0;
};

}  // namespace pcattn::framework
