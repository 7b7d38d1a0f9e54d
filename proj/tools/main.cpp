#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcattn/cli/commands.hpp"
#include "pcattn/cli/config.hpp"
#include "pcattn/cli/presets.hpp"
#include "pcattn/cli/sweep.hpp"
#include "pcattn/errors.hpp"
#include "pcattn/framework/checkpoint.hpp"
#include "pcattn/pcio/pcb.hpp"
#include "pcattn/pcio/synthetic.hpp"

namespace {

using namespace pcattn;
using namespace pcattn::cli;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "text";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  ExperimentConfig cfg = parse_config(read_file(g.config));
  if (g.seed) cfg.train.seed = *g.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  return cfg;
}

// Writes to <out>/<name> when --out is given, otherwise to stdout.
template <typename F>
void emit(const Globals& g, const std::string& name, F&& write) {
  if (g.out.empty()) {
    write(std::cout);
    return;
  }
  std::filesystem::create_directories(g.out);
  const auto path = std::filesystem::path(g.out) / name;
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  write(file);
  std::cerr << "wrote " << path.string() << '\n';
}

std::string extension(Format f) { return f == Format::csv ? ".csv" : ".txt"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud attention module toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment or sweep JSON file");
  app.add_option("--seed", g.seed, "Overrides the configured seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"csv", "text"}));

  auto* analyze = app.add_subcommand("analyze", "Parameter and FLOP counts of attention modules");
  std::string sweep;
  std::size_t points = analyzer::kDefaultPoints;
  analyze->add_option("--sweep", sweep, "Built-in sweep: locality, aggregation or position-encoding");
  analyze->add_option("--points", points, "Points per cloud for FLOP counting");

  auto* train = app.add_subcommand("train", "Train a model and write metrics.csv and model.ckpt");

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  std::string checkpoint;
  std::string eval_data;
  std::string predictions;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  eval->add_option("--data", eval_data, "PCB dataset (defaults to the training data of the checkpoint config)");
  eval->add_option("--predictions", predictions, "Write per-sample predictions CSV here");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of a toy model");
  double tolerance = 1e-4;
  std::string preset;
  gradcheck->add_option("--tolerance", tolerance, "Maximum relative error");
  gradcheck->add_option("--preset", preset, "Check a shipped preset instead of --config");

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic PCB dataset");
  std::string gen_task = "classification";
  std::size_t gen_samples = 32;
  std::size_t gen_points = 256;
  std::string gen_file;
  gen->add_option("--task", gen_task, "classification or segmentation");
  gen->add_option("--samples", gen_samples, "Number of clouds");
  gen->add_option("--points", gen_points, "Points per cloud");
  gen->add_option("--file", gen_file, "Output file (default <out>/synthetic_<task>.pcb)");

  auto* neighbors = app.add_subcommand("neighbors", "Dump neighbor groups of one cloud as CSV");
  std::string nb_data;
  std::size_t nb_sample = 0;
  std::size_t nb_points = 256;
  std::size_t nb_k = 32;
  std::vector<std::size_t> nb_scales{0};
  std::string nb_key_mode = "one";
  neighbors->add_option("--data", nb_data, "PCB dataset (default: one synthetic cloud)");
  neighbors->add_option("--sample", nb_sample, "Record index in the dataset");
  neighbors->add_option("--points", nb_points, "Points of the synthetic cloud");
  neighbors->add_option("--k", nb_k, "Neighbors per scale");
  neighbors->add_option("--scales", nb_scales, "Scale exponents")->delimiter(',');
  neighbors->add_option("--key-mode", nb_key_mode, "one or separate");

  CLI11_PARSE(app, argc, argv);

  try {
    const Format format = parse_format(g.format);
    if (analyze->parsed()) {
      std::vector<std::string> docs;
      if (!sweep.empty()) {
        docs = builtin_sweep(sweep);
      } else if (!g.config.empty()) {
        docs = expand_sweeps(read_file(g.config));
      } else {
        throw ConfigError("analyze needs --sweep or --config");
      }
      const auto rows = analyze_rows(docs, points);
      emit(g, "analyze" + extension(format), [&](std::ostream& os) { write_analyze(rows, format, os); });
    } else if (train->parsed()) {
      const ExperimentConfig cfg = load_config(g);
      const auto outcome = cmd_train(cfg, cfg.output_dir, std::cout);
      std::cerr << "wrote " << outcome.metrics_csv.string() << " and " << outcome.checkpoint.string() << '\n';
    } else if (eval->parsed()) {
      std::optional<ExperimentConfig> cfg;
      if (!g.config.empty()) cfg = load_config(g);
      pcio::Dataset data;
      if (!eval_data.empty()) {
        data = pcio::read_pcb(eval_data);
      } else {
        const auto ckpt_cfg = cfg ? *cfg : parse_config(framework::load_checkpoint(checkpoint).metadata);
        data = load_training_data(ckpt_cfg);
      }
      std::optional<std::filesystem::path> pred;
      if (!predictions.empty()) pred = predictions;
      const auto metrics = cmd_eval(checkpoint, data, cfg, pred);
      emit(g, "eval" + extension(format), [&](std::ostream& os) { write_metrics(metrics, format, os); });
    } else if (gradcheck->parsed()) {
      ExperimentConfig cfg;
      if (!preset.empty()) {
        const Preset& p = find_preset(preset);
        cfg.task = p.task;
        cfg.model.task = p.task;
        cfg.model.attention = p.attention;
        cfg.preset = p.name;
      } else {
        cfg = load_config(g);
      }
      const auto report = cmd_gradcheck(cfg, tolerance, g.seed.value_or(0));
      emit(g, "gradcheck" + extension(format), [&](std::ostream& os) { write_gradcheck(report, format, os); });
      return report.passed() ? 0 : 1;
    } else if (gen->parsed()) {
      const Task task = parse_task(gen_task);
      std::filesystem::path path = gen_file;
      if (path.empty()) {
        path = std::filesystem::path(g.out.empty() ? "." : g.out) / ("synthetic_" + std::string(to_string(task)) + ".pcb");
      }
      const auto data = cmd_gen_data(task, gen_samples, gen_points, g.seed.value_or(0), path);
      std::cerr << "wrote " << data.size() << " clouds to " << path.string() << '\n';
    } else if (neighbors->parsed()) {
      attention::AttentionConfig cfg;
      cfg.k = nb_k;
      cfg.scales = nb_scales;
      cfg.key_mode = attention::parse_key_mode(nb_key_mode);
      pcio::PointCloud pc;
      if (!nb_data.empty()) {
        const auto data = pcio::read_pcb(nb_data);
        if (nb_sample >= data.size()) {
          throw ContractError("sample " + std::to_string(nb_sample) + " out of range for " +
                              std::to_string(data.size()) + " records");
        }
        pc = data[nb_sample];
      } else {
        pc = pcio::gen_synthetic(Task::classification, nb_sample + 1, nb_points, g.seed.value_or(0))[nb_sample];
      }
      emit(g, "neighbors.csv", [&](std::ostream& os) { cmd_neighbors(pc, cfg, os); });
    }
  } catch (const pcattn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
