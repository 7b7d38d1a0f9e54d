#include "pcattn/framework/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "pcattn/errors.hpp"
#include "pcattn/seed.hpp"

namespace pcattn::framework {

using namespace numerics;

namespace {

std::vector<std::size_t> row_argmax(const Value& logits) {
  const std::size_t cols = logits.shape().back();
  const std::size_t rows = logits.numel() / cols;
  const auto data = logits.data();
  std::vector<std::size_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = data.subspan(r * cols, cols);
    out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<std::size_t> targets(const ModelConfig& cfg, const pcio::PointCloud& pc) {
  if (cfg.task == Task::classification) return {*pc.class_label};
  return {pc.part_labels->begin(), pc.part_labels->end()};
}

std::vector<std::vector<std::size_t>> all_parts(std::size_t categories, std::size_t parts) {
  std::vector<std::size_t> ids(parts);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return std::vector<std::vector<std::size_t>>(categories, ids);
}

Metrics score(const ModelConfig& cfg, const pcio::Dataset& data, const std::vector<std::vector<std::size_t>>& pred) {
  if (cfg.task == Task::classification) {
    std::vector<std::size_t> p;
    std::vector<std::size_t> l;
    for (std::size_t i = 0; i < data.size(); ++i) {
      p.push_back(pred[i][0]);
      l.push_back(*data[i].class_label);
    }
    return classification_metrics(p, l);
  }
  std::vector<std::vector<std::size_t>> labels;
  std::vector<std::size_t> categories;
  std::size_t n_categories = 1;
  for (const auto& pc : data) {
    labels.push_back(targets(cfg, pc));
    categories.push_back(pc.class_label.value_or(0));
    n_categories = std::max<std::size_t>(n_categories, categories.back() + 1);
  }
  return segmentation_metrics(pred, labels, categories, all_parts(n_categories, cfg.n_parts));
}

}  // namespace

void check_labels(const ModelConfig& cfg, const pcio::Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& pc = data[i];
    pc.validate();
    if (cfg.task == Task::classification) {
      if (!pc.class_label) throw ContractError("sample " + std::to_string(i) + " has no class label");
      if (*pc.class_label >= cfg.n_classes) {
        throw ContractError("sample " + std::to_string(i) + " has class " + std::to_string(*pc.class_label) +
                            " but the model has " + std::to_string(cfg.n_classes) + " classes");
      }
    } else {
      if (!pc.part_labels) throw ContractError("sample " + std::to_string(i) + " has no part labels");
      for (std::uint32_t l : *pc.part_labels) {
        if (l >= cfg.n_parts) {
          throw ContractError("sample " + std::to_string(i) + " has part " + std::to_string(l) + " but the model has " +
                              std::to_string(cfg.n_parts) + " parts");
        }
      }
    }
  }
}

double headline_metric(Task task, const Metrics& m) {
  return task == Task::classification ? m.overall_accuracy.value_or(0.0) : m.instance_miou.value_or(0.0);
}

std::vector<std::vector<std::size_t>> predict(const Model& model, const pcio::Dataset& data,
                                              const attention::BlockOptions& options) {
  NoGradGuard guard;
  std::vector<std::vector<std::size_t>> out;
  out.reserve(data.size());
  for (const auto& pc : data) out.push_back(row_argmax(forward(model, pc, options)));
  return out;
}

Metrics evaluate(const Model& model, const pcio::Dataset& data, const attention::BlockOptions& options) {
  check_labels(model.config, data);
  if (data.empty()) throw ContractError("cannot evaluate on an empty dataset");
  return score(model.config, data, predict(model, data, options));
}

std::vector<EpochRecord> train(Model& model, const pcio::Dataset& data, const TrainConfig& cfg,
                               const TrainOptions& options) {
  validate(cfg);
  if (data.empty()) throw ContractError("cannot train on an empty dataset");
  configure_allocator();
  check_labels(model.config, data);
  if (options.validation) check_labels(model.config, *options.validation);

  std::vector<Value> leaves;
  for (const auto& [name, v] : named_parameters(model)) leaves.push_back(v);
  AdamW optimizer(leaves);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EpochRecord> history;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 1, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::vector<std::vector<std::size_t>> predictions(data.size());
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const pcio::PointCloud sample = pcio::augment(data[i], cfg.augmentations, mix_seed(cfg.seed, 2, epoch * data.size() + i));
        const Value logits = forward(model, sample, options.block);
        const auto labels = targets(model.config, sample);
        const Value loss = cross_entropy(logits, labels);
        const double l = loss.item();
        if (!std::isfinite(l)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " on sample " + std::to_string(i));
        }
        loss_sum += l;
        predictions[i] = row_argmax(logits);
        backward(scale(loss, weight));
      }
      optimizer.step(lr, cfg.weight_decay);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(data.size());
    rec.train_metric = headline_metric(model.config.task, score(model.config, data, predictions));
    if (options.validation) rec.val_metric = headline_metric(model.config.task, evaluate(model, *options.validation, options.block));
    history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }
  return history;
}

std::string metrics_csv_header() { return "epoch,lr,train_loss,train_metric,val_metric"; }

std::string metrics_csv_row(const EpochRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,", r.epoch, r.lr, r.train_loss, r.train_metric);
  std::string row = buf;
  if (r.val_metric) {
    std::snprintf(buf, sizeof buf, "%.17g", *r.val_metric);
    row += buf;
  }
  return row;
}

}  // namespace pcattn::framework
