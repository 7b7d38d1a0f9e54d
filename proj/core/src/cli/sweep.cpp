#include "pcattn/cli/sweep.hpp"

#include <algorithm>
#include <array>

#include "json.hpp"
#include "pcattn/errors.hpp"

namespace pcattn::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 4> kListKeys{"aggregation", "scales", "seg_levels", "augment"};

struct Axis {
  json::json_pointer where;
  std::vector<json> options;
};

bool is_list_key(std::string_view key) {
  return std::find(kListKeys.begin(), kListKeys.end(), key) != kListKeys.end();
}

void collect(const json& node, const json::json_pointer& where, std::string_view key, std::vector<Axis>& axes) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) collect(v, where / k, k, axes);
    return;
  }
  if (!node.is_array()) return;
  if (is_list_key(key)) {
    const bool axis = !node.empty() && std::all_of(node.begin(), node.end(), [](const json& e) { return e.is_array(); });
    if (!axis) return;
  }
  if (node.empty()) throw ConfigError("sweep axis " + where.to_string() + " has no values");
  axes.push_back({where, std::vector<json>(node.begin(), node.end())});
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

std::vector<std::string> expand(const json& tmpl, std::size_t cap) {
  if (!tmpl.is_object()) throw ConfigError("sweep template must be a JSON object");
  std::vector<Axis> axes;
  collect(tmpl, json::json_pointer(), "", axes);
  std::size_t rows = 1;
  for (const auto& a : axes) {
    if (a.options.size() > cap / rows) {
      throw ConfigError("sweep expands beyond the " + std::to_string(cap) + " row cap");
    }
    rows *= a.options.size();
  }
  std::vector<std::string> out;
  out.reserve(rows);
  std::vector<std::size_t> pick(axes.size(), 0);
  for (std::size_t r = 0; r < rows; ++r) {
    json doc = tmpl;
    for (std::size_t i = 0; i < axes.size(); ++i) doc[axes[i].where] = axes[i].options[pick[i]];
    out.push_back(doc.dump());
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++pick[i] < axes[i].options.size()) break;
      pick[i] = 0;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> expand_sweep(std::string_view template_json, std::size_t cap) {
  return expand(parse(template_json), cap);
}

std::vector<std::string> expand_sweeps(std::string_view json_text, std::size_t cap) {
  const json doc = parse(json_text);
  if (!doc.is_array()) return expand(doc, cap);
  std::vector<std::string> out;
  for (const auto& t : doc) {
    auto rows = expand(t, cap);
    if (rows.size() > cap - out.size()) {
      throw ConfigError("sweep expands beyond the " + std::to_string(cap) + " row cap");
    }
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

const std::vector<std::string>& builtin_sweep_names() {
  static const std::vector<std::string> names{"locality", "aggregation", "position-encoding"};
  return names;
}

std::vector<std::string> builtin_sweep(std::string_view name) {
  std::vector<std::string> rows;
  auto add = [&](const char* tmpl) {
    auto r = expand_sweep(tmpl);
    rows.insert(rows.end(), r.begin(), r.end());
  };
  if (name == "locality") {
    for (const char* basis : {"features", "coords"}) {
      const std::string b = std::string("\"basis\":\"") + basis + "\"";
      add(("{\"method\":\"l_dot\",\"aggregation\":[\"offset\"]," + b + ",\"scales\":[[0],[1],[2]]}").c_str());
      add(("{\"method\":\"l_dot\",\"aggregation\":[\"offset\"]," + b +
           ",\"scales\":[[0,1],[0,1,2]],\"key_mode\":[\"one\",\"separate\"]}")
              .c_str());
    }
  } else if (name == "aggregation") {
    add(R"({"method":["g_dot","g_l2sub"]})");
    add(R"({"method":["l_dot","l_offset_dot","l_add","l_concat","l_vec_sub","l_vec_add"],
             "aggregation":[["neighbor"],["offset"],["center","neighbor"],["center","offset"],
                            ["neighbor","offset"],["center","neighbor","offset"]]})");
  } else if (name == "position-encoding") {
    add(R"({"method":["g_dot","g_l2sub"],"pe":["none","pe1","pe2","pe3","pe4"]})");
    add(R"({"method":"l_dot","aggregation":["offset"],"pe":["none","pe1","pe2","pe3","pe4"]})");
    add(R"({"method":"l_offset_dot","aggregation":["neighbor"],"pe":["none","pe1","pe2","pe3","pe4"]})");
    add(R"({"method":"l_vec_sub","aggregation":["neighbor"],"pe":["none","pe1","pe2","pe3","pe4"]})");
  } else {
    std::string known;
    for (const auto& n : builtin_sweep_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown sweep '" + std::string(name) + "' (known: " + known + ")");
  }
  return rows;
}

}  // namespace pcattn::cli
