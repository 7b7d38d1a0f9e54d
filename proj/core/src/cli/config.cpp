#include "pcattn/cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <vector>

#include "json.hpp"
#include "pcattn/cli/presets.hpp"
#include "pcattn/errors.hpp"
#include "pcattn/pcio/pcb.hpp"
#include "pcattn/pcio/synthetic.hpp"

namespace pcattn::cli {

using attention::AttentionConfig;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? "document" : path) + ": expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw ConfigError("unknown key '" + join(path, key) + "' (allowed: " + list + ")");
    }
  }
}

std::uint64_t get_u64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError(path + ": expected a non-negative integer, got " + j.dump());
}

std::size_t get_size(const json& j, const std::string& path) { return static_cast<std::size_t>(get_u64(j, path)); }

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number, got " + j.dump());
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string, got " + j.dump());
  return j.get<std::string>();
}

std::vector<std::string> get_strings(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of strings, got " + j.dump());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> get_sizes(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of integers, got " + j.dump());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_size(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Parse errors of enum-like strings carry no path; prefix it.
template <typename F>
auto with_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void read_attention(const json& j, const std::string& path, AttentionConfig& cfg, bool allow_widths) {
  if (allow_widths) {
    check_keys(j, path, {"scope", "method", "aggregation", "pe", "k", "scales", "key_mode", "basis", "dim",
                         "ffn_hidden"});
  } else {
    check_keys(j, path, {"scope", "method", "aggregation", "pe", "k", "scales", "key_mode", "basis"});
  }
  if (j.contains("method")) {
    const auto p = join(path, "method");
    cfg.method = with_path(p, [&] { return attention::parse_method(get_string(j["method"], p)); });
    cfg.scope = attention::scope_of(cfg.method);
    if (cfg.scope == attention::Scope::global) cfg.aggregation = attention::Aggregation::none();
  }
  if (j.contains("scope")) {
    const auto p = join(path, "scope");
    cfg.scope = with_path(p, [&] { return attention::parse_scope(get_string(j["scope"], p)); });
  }
  if (j.contains("aggregation")) {
    const auto p = join(path, "aggregation");
    cfg.aggregation = with_path(p, [&] { return attention::parse_aggregation(get_strings(j["aggregation"], p)); });
  }
  if (j.contains("pe")) {
    const auto p = join(path, "pe");
    cfg.pe = with_path(p, [&] { return attention::parse_pe(get_string(j["pe"], p)); });
  }
  if (j.contains("k")) cfg.k = get_size(j["k"], join(path, "k"));
  if (j.contains("scales")) cfg.scales = get_sizes(j["scales"], join(path, "scales"));
  if (j.contains("key_mode")) {
    const auto p = join(path, "key_mode");
    cfg.key_mode = with_path(p, [&] { return attention::parse_key_mode(get_string(j["key_mode"], p)); });
  }
  if (j.contains("basis")) {
    const auto p = join(path, "basis");
    cfg.basis = with_path(p, [&] { return attention::parse_basis(get_string(j["basis"], p)); });
  }
  if (allow_widths) {
    if (j.contains("dim")) cfg.dim = get_size(j["dim"], join(path, "dim"));
    if (j.contains("ffn_hidden")) cfg.ffn_hidden = get_size(j["ffn_hidden"], join(path, "ffn_hidden"));
  }
}

ordered_json attention_json(const AttentionConfig& cfg) {
  ordered_json j;
  j["scope"] = std::string(attention::to_string(cfg.scope));
  j["method"] = std::string(attention::to_string(cfg.method));
  j["aggregation"] = attention::aggregation_names(cfg.aggregation);
  j["pe"] = std::string(attention::to_string(cfg.pe));
  j["k"] = cfg.k;
  j["scales"] = cfg.scales;
  j["key_mode"] = std::string(neighborhood::to_string(cfg.key_mode));
  j["basis"] = std::string(neighborhood::to_string(cfg.basis));
  return j;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::classification ? "classification" : "segmentation"; }

Task parse_task(std::string_view s) {
  if (s == "classification" || s == "cls") return Task::classification;
  if (s == "segmentation" || s == "seg") return Task::segmentation;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected classification or segmentation)");
}

ExperimentConfig parse_config(std::string_view text) {
  const json doc = parse_json(text);
  require_object(doc, "");
  std::vector<std::string> missing;
  for (const char* key : {"v", "task"}) {
    if (!doc.contains(key)) missing.emplace_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("missing required keys: " + list);
  }
  check_keys(doc, "", {"v", "task", "preset", "model", "train", "data", "out"});
  if (get_u64(doc["v"], "v") != static_cast<std::uint64_t>(kSchemaVersion)) {
    throw ConfigError("v: unsupported schema version " + doc["v"].dump() + " (expected 1)");
  }

  ExperimentConfig cfg;
  cfg.task = with_path("task", [&] { return parse_task(get_string(doc["task"], "task")); });
  cfg.model.task = cfg.task;
  cfg.train.weight_decay = framework::default_weight_decay(cfg.task);

  const json empty = json::object();
  const json& model = doc.contains("model") ? doc["model"] : empty;
  check_keys(model, "model", {"dim", "ffn_hidden", "blocks", "n_classes", "n_parts", "seg_levels", "embed_hidden",
                              "head_hidden", "attention"});
  if (doc.contains("preset")) {
    cfg.preset = get_string(doc["preset"], "preset");
    const Preset& p = with_path("preset", [&] { return std::cref(find_preset(*cfg.preset)); }).get();
    if (model.contains("attention")) {
      throw ConfigError("model.attention cannot be combined with preset '" + p.name +
                        "'; the preset fixes the attention module");
    }
    if (p.task != cfg.task) {
      throw ConfigError("preset '" + p.name + "' is a " + std::string(to_string(p.task)) + " module but task is " +
                        std::string(to_string(cfg.task)));
    }
    cfg.model.attention = p.attention;
  } else if (model.contains("attention")) {
    read_attention(model["attention"], "model.attention", cfg.model.attention, false);
  }
  if (model.contains("dim")) cfg.model.attention.dim = get_size(model["dim"], "model.dim");
  if (model.contains("ffn_hidden")) cfg.model.attention.ffn_hidden = get_size(model["ffn_hidden"], "model.ffn_hidden");
  if (model.contains("blocks")) cfg.model.blocks = get_size(model["blocks"], "model.blocks");
  if (model.contains("n_classes")) cfg.model.n_classes = get_size(model["n_classes"], "model.n_classes");
  if (model.contains("n_parts")) cfg.model.n_parts = get_size(model["n_parts"], "model.n_parts");
  if (model.contains("seg_levels")) cfg.model.seg_levels = get_sizes(model["seg_levels"], "model.seg_levels");
  if (model.contains("embed_hidden")) cfg.model.embed_hidden = get_size(model["embed_hidden"], "model.embed_hidden");
  if (model.contains("head_hidden")) cfg.model.head_hidden = get_size(model["head_hidden"], "model.head_hidden");

  if (doc.contains("train")) {
    const json& t = doc["train"];
    check_keys(t, "train", {"epochs", "batch", "lr", "lr_min", "warmup_epochs", "weight_decay", "seed", "augment"});
    if (t.contains("epochs")) cfg.train.epochs = get_size(t["epochs"], "train.epochs");
    if (t.contains("batch")) cfg.train.batch = get_size(t["batch"], "train.batch");
    if (t.contains("lr")) cfg.train.lr_start = get_double(t["lr"], "train.lr");
    if (t.contains("lr_min")) cfg.train.lr_end = get_double(t["lr_min"], "train.lr_min");
    if (t.contains("warmup_epochs")) cfg.train.warmup_epochs = get_size(t["warmup_epochs"], "train.warmup_epochs");
    if (t.contains("weight_decay")) cfg.train.weight_decay = get_double(t["weight_decay"], "train.weight_decay");
    if (t.contains("seed")) cfg.train.seed = get_u64(t["seed"], "train.seed");
    if (t.contains("augment")) {
      cfg.train.augmentations.clear();
      for (const auto& name : get_strings(t["augment"], "train.augment")) {
        const auto a = pcio::parse_augmentation(name);
        if (!a) {
          throw ConfigError("train.augment: unknown augmentation '" + name +
                            "' (expected jitter, rotate, translate, aniso_scale)");
        }
        cfg.train.augmentations.push_back(*a);
      }
    }
  }

  if (doc.contains("data")) {
    const json& d = doc["data"];
    check_keys(d, "data", {"pcb", "synthetic", "validation_pcb"});
    if (d.contains("pcb")) cfg.data.pcb = get_string(d["pcb"], "data.pcb");
    if (d.contains("validation_pcb")) cfg.data.validation_pcb = get_string(d["validation_pcb"], "data.validation_pcb");
    if (d.contains("synthetic")) {
      if (cfg.data.pcb) throw ConfigError("data: give either pcb or synthetic, not both");
      const json& s = d["synthetic"];
      check_keys(s, "data.synthetic", {"samples", "points", "seed"});
      if (s.contains("samples")) cfg.data.synthetic.samples = get_size(s["samples"], "data.synthetic.samples");
      if (s.contains("points")) cfg.data.synthetic.points = get_size(s["points"], "data.synthetic.points");
      if (s.contains("seed")) cfg.data.synthetic.seed = get_u64(s["seed"], "data.synthetic.seed");
    }
  }
  if (cfg.data.synthetic.samples == 0) throw ConfigError("data.synthetic.samples must be at least 1");
  if (cfg.data.synthetic.points < pcio::kMinSyntheticPoints) {
    throw ConfigError("data.synthetic.points must be at least " + std::to_string(pcio::kMinSyntheticPoints));
  }
  if (doc.contains("out")) cfg.output_dir = get_string(doc["out"], "out");

  framework::validate(cfg.model);
  framework::validate(cfg.train);
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ordered_json doc;
  doc["v"] = kSchemaVersion;
  doc["task"] = std::string(to_string(cfg.task));
  if (cfg.preset) doc["preset"] = *cfg.preset;
  ordered_json model;
  model["dim"] = cfg.model.attention.dim;
  model["ffn_hidden"] = cfg.model.attention.ffn_hidden;
  model["blocks"] = cfg.model.blocks;
  model["n_classes"] = cfg.model.n_classes;
  model["n_parts"] = cfg.model.n_parts;
  model["seg_levels"] = cfg.model.seg_levels;
  model["embed_hidden"] = cfg.model.embed_hidden;
  model["head_hidden"] = cfg.model.head_hidden;
  if (!cfg.preset) model["attention"] = attention_json(cfg.model.attention);
  doc["model"] = model;
  ordered_json train;
  train["epochs"] = cfg.train.epochs;
  train["batch"] = cfg.train.batch;
  train["lr"] = cfg.train.lr_start;
  train["lr_min"] = cfg.train.lr_end;
  train["warmup_epochs"] = cfg.train.warmup_epochs;
  train["weight_decay"] = cfg.train.weight_decay;
  train["seed"] = cfg.train.seed;
  std::vector<std::string> aug;
  for (auto a : cfg.train.augmentations) aug.emplace_back(pcio::to_string(a));
  train["augment"] = aug;
  doc["train"] = train;
  ordered_json data;
  if (cfg.data.pcb) {
    data["pcb"] = *cfg.data.pcb;
  } else {
    data["synthetic"] = ordered_json{{"samples", cfg.data.synthetic.samples},
                                     {"points", cfg.data.synthetic.points},
                                     {"seed", cfg.data.synthetic.seed}};
  }
  if (cfg.data.validation_pcb) data["validation_pcb"] = *cfg.data.validation_pcb;
  doc["data"] = data;
  doc["out"] = cfg.output_dir;
  return doc.dump(2) + "\n";
}

AttentionConfig parse_attention(std::string_view json_text) {
  AttentionConfig cfg;
  read_attention(parse_json(json_text), "", cfg, true);
  return cfg;
}

std::string canonical_attention(const AttentionConfig& cfg) {
  ordered_json j = attention_json(cfg);
  j["dim"] = cfg.dim;
  j["ffn_hidden"] = cfg.ffn_hidden;
  return j.dump();
}

std::string config_hash(const AttentionConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_attention(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

pcio::Dataset load_training_data(const ExperimentConfig& cfg) {
  if (cfg.data.pcb) return pcio::read_pcb(*cfg.data.pcb);
  const auto& s = cfg.data.synthetic;
  return pcio::gen_synthetic(cfg.task, s.samples, s.points, s.seed);
}

std::optional<pcio::Dataset> load_validation_data(const ExperimentConfig& cfg) {
  if (!cfg.data.validation_pcb) return std::nullopt;
  return pcio::read_pcb(*cfg.data.validation_pcb);
}

}  // namespace pcattn::cli
