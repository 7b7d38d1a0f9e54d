#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pcattn/attention/config.hpp"
#include "pcattn/task.hpp"

namespace pcattn::cli {

/// A named attention module recommended for one task.
struct Preset {
  std::string name;
  Task task;
  attention::AttentionConfig attention;
};

/// cls_global, cls_local, seg_global, seg_local.
const std::vector<Preset>& presets();

/// Throws ConfigError for an unknown name.
const Preset& find_preset(std::string_view name);

}  // namespace pcattn::cli
