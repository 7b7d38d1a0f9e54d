#include "pcattn/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "pcattn/errors.hpp"
#include "pcattn/framework/checkpoint.hpp"
#include "pcattn/neighborhood/knn.hpp"
#include "pcattn/pcio/pcb.hpp"
#include "pcattn/pcio/synthetic.hpp"

namespace pcattn::cli {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void print_table(const std::vector<std::vector<std::string>>& rows, std::ostream& out) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

}  // namespace

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "text") return Format::text;
  throw ConfigError("unknown format '" + std::string(s) + "' (expected csv or text)");
}

std::vector<AnalyzeRow> analyze_rows(const std::vector<std::string>& attention_docs, std::size_t points) {
  std::vector<AnalyzeRow> rows;
  rows.reserve(attention_docs.size());
  for (const auto& doc : attention_docs) {
    AnalyzeRow row;
    try {
      const auto cfg = parse_attention(doc);
      row.hash = config_hash(cfg);
      row.description = attention::describe(cfg);
      if (auto err = attention::validation_error(cfg)) {
        row.status = "SKIP: " + *err;
      } else {
        row.cost = analyzer::analyze(cfg, points);
        row.status = "OK";
      }
    } catch (const ConfigError& e) {
      row.description = doc;
      row.status = std::string("SKIP: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_analyze(const std::vector<AnalyzeRow>& rows, Format format, std::ostream& out) {
  const std::vector<std::string> header{"hash",           "description", "params",  "params_k",
                                        "vector_params",  "pe_bias_params", "flops", "flops_g", "status"};
  std::vector<std::vector<std::string>> table{header};
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.hash, r.description};
    if (r.cost) {
      const auto& c = *r.cost;
      cells.insert(cells.end(), {std::to_string(c.params), fmt("%.2f", c.params_k()), std::to_string(c.vector_params),
                                 std::to_string(c.pe_bias_params), std::to_string(c.flops), fmt("%.5f", c.flops_g())});
    } else {
      cells.insert(cells.end(), 6, "");
    }
    cells.push_back(r.status);
    table.push_back(std::move(cells));
  }
  if (format == Format::text) {
    print_table(table, out);
    return;
  }
  for (const auto& r : table) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << csv_quote(r[c]);
    out << '\n';
  }
}

TrainOutcome cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log,
                       const framework::TrainOptions& extra) {
  const pcio::Dataset data = load_training_data(cfg);
  const auto validation = load_validation_data(cfg);
  std::filesystem::create_directories(out_dir);
  TrainOutcome outcome;
  outcome.metrics_csv = out_dir / "metrics.csv";
  outcome.checkpoint = out_dir / "model.ckpt";
  const std::string config_text = serialize_config(cfg);
  open_out(out_dir / "config.json") << config_text;

  std::ofstream csv = open_out(outcome.metrics_csv);
  csv << framework::metrics_csv_header() << '\n';
  log << framework::metrics_csv_header() << '\n';

  framework::Model model = framework::make_model(cfg.model, cfg.train.seed);
  framework::TrainOptions options = extra;
  if (validation) options.validation = &*validation;
  options.on_epoch = [&](const framework::EpochRecord& r) {
    const std::string row = framework::metrics_csv_row(r);
    csv << row << '\n' << std::flush;
    log << row << '\n' << std::flush;
    if (extra.on_epoch) extra.on_epoch(r);
  };
  outcome.records = framework::train(model, data, cfg.train, options);
  ExperimentConfig portable = cfg;
  portable.output_dir = ExperimentConfig{}.output_dir;
  framework::save_checkpoint(outcome.checkpoint,
                             framework::snapshot(framework::named_parameters(model), serialize_config(portable)));
  return outcome;
}

framework::Metrics cmd_eval(const std::filesystem::path& checkpoint, const pcio::Dataset& data,
                            const std::optional<ExperimentConfig>& model_cfg,
                            const std::optional<std::filesystem::path>& predictions_csv) {
  const auto ckpt = framework::load_checkpoint(checkpoint);
  ExperimentConfig cfg;
  if (model_cfg) {
    cfg = *model_cfg;
  } else {
    try {
      cfg = parse_config(ckpt.metadata);
    } catch (const ConfigError& e) {
      throw CompatibilityError(checkpoint.string() + " carries no usable model config: " + e.what());
    }
  }
  framework::Model model = framework::make_model(cfg.model, cfg.train.seed);
  framework::restore(ckpt, framework::named_parameters(model));
  framework::check_labels(model.config, data);
  const auto predicted = framework::predict(model, data);
  if (predictions_csv) {
    std::ofstream out = open_out(*predictions_csv);
    out << "sample,point,label,predicted\n";
    for (std::size_t s = 0; s < data.size(); ++s) {
      if (cfg.task == Task::classification) {
        out << s << ",," << *data[s].class_label << ',' << predicted[s][0] << '\n';
      } else {
        const auto& labels = *data[s].part_labels;
        for (std::size_t p = 0; p < labels.size(); ++p) {
          out << s << ',' << p << ',' << labels[p] << ',' << predicted[s][p] << '\n';
        }
      }
    }
  }
  return framework::evaluate(model, data);
}

void write_metrics(const framework::Metrics& m, Format format, std::ostream& out) {
  const std::pair<const char*, const std::optional<double>*> fields[] = {
      {"overall_accuracy", &m.overall_accuracy},
      {"mean_class_accuracy", &m.mean_class_accuracy},
      {"instance_miou", &m.instance_miou},
      {"category_miou", &m.category_miou},
  };
  if (format == Format::csv) out << "metric,value\n";
  for (const auto& [name, value] : fields) {
    if (!*value) continue;
    if (format == Format::csv) {
      out << name << ',' << fmt("%.17g", **value) << '\n';
    } else {
      out << name << ' ' << fmt("%.4f", **value) << '\n';
    }
  }
}

numerics::GradCheckReport cmd_gradcheck(const ExperimentConfig& cfg, double tolerance, std::uint64_t seed,
                                        const ToyShape& toy) {
  framework::ModelConfig mc = cfg.model;
  mc.attention.dim = toy.dim;
  mc.attention.ffn_hidden = 2 * toy.dim;
  mc.attention.k = toy.k;
  mc.embed_hidden = toy.dim;
  mc.head_hidden = toy.dim;
  mc.blocks = 1;
  std::size_t points = toy.points;
  if (mc.attention.scope == attention::Scope::local) {
    points = std::max(points, neighborhood::required_ranks(mc.attention.k, mc.attention.scales, mc.attention.key_mode));
  }
  if (mc.task == Task::segmentation) {
    mc.seg_levels = {2};
    points *= 2;
  }
  const framework::Model model = framework::make_model(mc, seed);
  const pcio::PointCloud sample = pcio::gen_synthetic(mc.task, 1, points, seed).front();
  std::vector<std::size_t> labels;
  if (mc.task == Task::classification) {
    labels.push_back(*sample.class_label % mc.n_classes);
  } else {
    for (auto l : *sample.part_labels) labels.push_back(l % mc.n_parts);
  }
  auto loss = [&] { return numerics::cross_entropy(framework::forward(model, sample), labels); };
  numerics::GradCheckOptions options;
  options.tolerance = tolerance;
  return numerics::check_gradients(loss, framework::named_parameters(model), options);
}

void write_gradcheck(const numerics::GradCheckReport& report, Format format, std::ostream& out) {
  std::vector<std::vector<std::string>> table{{"group", "entries", "max_rel_error", "refined", "status"}};
  for (const auto& g : report.groups) {
    table.push_back({g.name, std::to_string(g.entries), fmt(format == Format::csv ? "%.17g" : "%.3e", g.max_rel_error),
                     std::to_string(g.refined), g.passed ? "PASS" : "FAIL"});
  }
  if (format == Format::csv) {
    for (const auto& r : table) {
      for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
      out << '\n';
    }
    return;
  }
  print_table(table, out);
  out << (report.passed() ? "PASS" : "FAIL") << " max_rel_error " << fmt("%.3e", report.max_rel_error()) << '\n';
}

pcio::Dataset cmd_gen_data(Task task, std::size_t samples, std::size_t points, std::uint64_t seed,
                           const std::filesystem::path& path) {
  auto data = pcio::gen_synthetic(task, samples, points, seed);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  pcio::write_pcb(path, data);
  return data;
}

void cmd_neighbors(const pcio::PointCloud& pc, const attention::AttentionConfig& cfg, std::ostream& out) {
  pc.validate();
  const std::size_t need = neighborhood::required_ranks(cfg.k, cfg.scales, cfg.key_mode);
  if (need > pc.size()) {
    throw ContractError("neighbor selection needs " + std::to_string(need) + " ranked points but the cloud has " +
                        std::to_string(pc.size()));
  }
  std::vector<double> flat;
  flat.reserve(pc.size() * 3);
  for (const auto& p : pc.positions) flat.insert(flat.end(), p.begin(), p.end());
  const auto index = neighborhood::build_neighbor_index(flat, pc.size(), 3, cfg.k, cfg.scales, cfg.key_mode,
                                                        neighborhood::Basis::coords);
  out << neighborhood::neighbors_csv(index);
}

}  // namespace pcattn::cli
