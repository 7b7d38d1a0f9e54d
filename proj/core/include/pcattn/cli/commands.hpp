#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pcattn/analyzer/cost.hpp"
#include "pcattn/cli/config.hpp"
#include "pcattn/framework/metrics.hpp"
#include "pcattn/framework/trainer.hpp"
#include "pcattn/numerics/gradcheck.hpp"

namespace pcattn::cli {

enum class Format { csv, text };

Format parse_format(std::string_view s);

// ---- analyze ---------------------------------------------------------------

struct AnalyzeRow {
  std::string hash;
  std::string description;
  /// Empty when the row was skipped.
  std::optional<analyzer::CostReport> cost;
  /// "OK" or "SKIP: <reason>".
  std::string status;
};

/// One row per attention JSON object. Invalid rows are reported, not thrown.
std::vector<AnalyzeRow> analyze_rows(const std::vector<std::string>& attention_docs,
                                     std::size_t points = analyzer::kDefaultPoints);

void write_analyze(const std::vector<AnalyzeRow>& rows, Format format, std::ostream& out);

// ---- train / eval ----------------------------------------------------------

struct TrainOutcome {
  std::vector<framework::EpochRecord> records;
  std::filesystem::path metrics_csv;
  std::filesystem::path checkpoint;
};

/// Trains the configured model, writing metrics.csv, config.json and
/// model.ckpt under `out_dir` and echoing each CSV row to `log`. The
/// checkpoint's embedded config leaves out the output directory.
TrainOutcome cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
                       const framework::TrainOptions& extra = {});

/// Rebuilds the model from the checkpoint's embedded config, or from
/// `model_cfg` when given, and scores it on `data`. Per-point predictions
/// go to `predictions_csv` when set (columns sample,point,label,predicted;
/// point is empty for classification).
framework::Metrics cmd_eval(const std::filesystem::path& checkpoint, const pcio::Dataset& data,
                            const std::optional<ExperimentConfig>& model_cfg = std::nullopt,
                            const std::optional<std::filesystem::path>& predictions_csv = std::nullopt);

void write_metrics(const framework::Metrics& m, Format format, std::ostream& out);

// ---- gradcheck -------------------------------------------------------------

struct ToyShape {
  std::size_t points = 16;
  std::size_t dim = 8;
  std::size_t k = 4;
};

/// Central-difference check of every parameter of a one-block toy instance
/// of the configured attention variant, one report group per parameter.
numerics::GradCheckReport cmd_gradcheck(const ExperimentConfig& cfg, double tolerance, std::uint64_t seed = 0,
                                        const ToyShape& toy = {});

void write_gradcheck(const numerics::GradCheckReport& report, Format format, std::ostream& out);

// ---- data plumbing ---------------------------------------------------------

/// Writes a synthetic set to `path` as PCB and returns it.
pcio::Dataset cmd_gen_data(Task task, std::size_t samples, std::size_t points, std::uint64_t seed,
                           const std::filesystem::path& path);

/// Neighbor CSV of one cloud under the given selection settings.
void cmd_neighbors(const pcio::PointCloud& pc, const attention::AttentionConfig& cfg, std::ostream& out);

}  // namespace pcattn::cli
