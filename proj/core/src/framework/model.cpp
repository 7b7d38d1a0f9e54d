#include "pcattn/framework/model.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "pcattn/errors.hpp"
#include "pcattn/framework/sampling.hpp"
#include "pcattn/seed.hpp"

namespace pcattn::framework {

using namespace numerics;

void validate(const ModelConfig& cfg) {
  attention::validate(cfg.attention);
  if (cfg.embed_hidden == 0 || cfg.head_hidden == 0) throw ConfigError("hidden widths must be at least 1");
  if (cfg.task == Task::classification) {
    if (cfg.blocks == 0) throw ConfigError("blocks must be at least 1");
    if (cfg.n_classes < 2) throw ConfigError("n_classes must be at least 2");
  } else {
    if (cfg.n_parts < 2) throw ConfigError("n_parts must be at least 2");
    for (std::size_t r : cfg.seg_levels) {
      if (r < 2) throw ConfigError("segmentation downsampling ratios must be at least 2");
    }
  }
}

std::size_t block_count(const ModelConfig& cfg) {
  return cfg.task == Task::classification ? cfg.blocks : cfg.seg_levels.size() + 1;
}

Model make_model(const ModelConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const std::size_t d = cfg.attention.dim;
  Model m;
  m.config = cfg;
  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  m.embed1 = make_linear(3, cfg.embed_hidden, rng, false, 2.0);
  m.embed2 = make_linear(cfg.embed_hidden, d, rng);
  for (std::size_t b = 0; b < block_count(cfg); ++b) m.blocks.push_back(attention::make_attention_params(cfg.attention, rng));
  if (cfg.task == Task::segmentation) {
    for (std::size_t l = 0; l < cfg.seg_levels.size(); ++l) m.fuse.push_back(make_linear(2 * d, d, rng));
  }
  const std::size_t out = cfg.task == Task::classification ? cfg.n_classes : cfg.n_parts;
  m.head1 = make_linear(d, cfg.head_hidden, rng, false, 2.0);
  m.head2 = make_linear(cfg.head_hidden, out, rng);
  return m;
}

std::vector<std::pair<std::string, Value>> named_parameters(const Model& model) {
  std::vector<std::pair<std::string, Value>> out;
  auto push = [&](const std::string& name, const LinearParams& l) {
    out.emplace_back(name, l.weight);
    if (l.bias) out.emplace_back(name + ".bias", *l.bias);
  };
  push("embed1", model.embed1);
  push("embed2", model.embed2);
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    auto block = attention::named_parameters(model.blocks[b], "block" + std::to_string(b) + ".");
    out.insert(out.end(), block.begin(), block.end());
  }
  for (std::size_t l = 0; l < model.fuse.size(); ++l) push("fuse" + std::to_string(l), model.fuse[l]);
  push("head1", model.head1);
  push("head2", model.head2);
  return out;
}

Value coords_value(const std::vector<pcio::Vec3>& positions) {
  std::vector<double> flat;
  flat.reserve(positions.size() * 3);
  for (const auto& p : positions) flat.insert(flat.end(), p.begin(), p.end());
  return Value::constant(Shape{positions.size(), 3}, std::move(flat));
}

Value embed(const Model& model, const Value& coords) {
  return linear(relu(linear(coords, model.embed1)), model.embed2);
}

namespace {

/// Neighbor groups shared by every block at one resolution, available when
/// they are ranked on coordinates rather than on the evolving features.
std::optional<neighborhood::NeighborIndex> shared_neighbors(const Model& model, const Value& coords) {
  const auto& cfg = model.config.attention;
  if (cfg.scope != attention::Scope::local || cfg.basis != attention::Basis::coords) return std::nullopt;
  return attention::neighbors_for(cfg, coords, coords);
}

Value run_block(const Model& model, std::size_t b, const Value& x, const Value& coords,
                const std::optional<neighborhood::NeighborIndex>& neighbors, const attention::BlockOptions& options) {
  return attention::attention_block(model.config.attention, model.blocks[b], x, coords,
                                    neighbors ? &*neighbors : nullptr, options);
}

void check_task(const Model& model, Task task) {
  if (model.config.task != task) {
    throw ContractError(task == Task::classification ? "forward_cls called on a segmentation model"
                                                     : "forward_seg called on a classification model");
  }
}

std::vector<pcio::Vec3> subset(const std::vector<pcio::Vec3>& pts, const std::vector<std::size_t>& ids) {
  std::vector<pcio::Vec3> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) out.push_back(pts[i]);
  return out;
}

}  // namespace

Value forward_cls(const Model& model, const pcio::PointCloud& pc, const attention::BlockOptions& options) {
  check_task(model, Task::classification);
  const Value coords = coords_value(pc.positions);
  const auto neighbors = shared_neighbors(model, coords);
  Value x = embed(model, coords);
  for (std::size_t b = 0; b < model.blocks.size(); ++b) x = run_block(model, b, x, coords, neighbors, options);
  const Value pooled = reduce(x, 0, Reduction::max);
  return linear(relu(linear(pooled, model.head1)), model.head2);
}

Value forward_seg(const Model& model, const pcio::PointCloud& pc, const attention::BlockOptions& options) {
  check_task(model, Task::segmentation);
  const auto& levels = model.config.seg_levels;
  std::vector<std::vector<pcio::Vec3>> positions{pc.positions};
  std::vector<Value> skips;

  Value coords = coords_value(pc.positions);
  Value x = run_block(model, 0, embed(model, coords), coords, shared_neighbors(model, coords), options);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    skips.push_back(x);
    const auto& fine = positions.back();
    const std::size_t m = std::max<std::size_t>(1, fine.size() / levels[l]);
    const auto ids = farthest_point_sample(fine, m);
    IndexTable table(m, 1);
    table.ids = ids;
    positions.push_back(subset(fine, ids));
    coords = coords_value(positions.back());
    x = reshape(gather(x, table), Shape{m, model.config.attention.dim});
    x = run_block(model, l + 1, x, coords, shared_neighbors(model, coords), options);
  }
  for (std::size_t l = levels.size(); l-- > 0;) {
    const Value up = interpolate_upsample(x, positions[l + 1], positions[l]);
    x = linear(concat({up, skips[l]}, 1), model.fuse[l]);
  }
  return linear(relu(linear(x, model.head1)), model.head2);
}

Value forward(const Model& model, const pcio::PointCloud& pc, const attention::BlockOptions& options) {
  return model.config.task == Task::classification ? forward_cls(model, pc, options) : forward_seg(model, pc, options);
}

}  // namespace pcattn::framework
