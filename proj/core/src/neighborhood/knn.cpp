#include "pcattn/neighborhood/knn.hpp"

#include <algorithm>
#include <numeric>

#include "pcattn/errors.hpp"

namespace pcattn::neighborhood {

std::string_view to_string(Basis b) { return b == Basis::coords ? "coords" : "features"; }
std::string_view to_string(KeyMode m) { return m == KeyMode::one ? "one" : "separate"; }

IndexTable rank_neighbors(std::span<const double> data, std::size_t n, std::size_t dim, std::size_t m) {
  if (data.size() != n * dim) {
    throw DimensionError("rank_neighbors: data holds " + std::to_string(data.size()) + " values, expected " +
                         std::to_string(n) + " x " + std::to_string(dim));
  }
  if (m > n) {
    throw ContractError("rank_neighbors: asked for " + std::to_string(m) + " neighbors among " + std::to_string(n) +
                        " points");
  }
  IndexTable out(n, m);
  if (m == 0) return out;
  // Column-major copy so the inner loop runs over candidate points; each
  // distance still accumulates its coordinates in order.
  std::vector<double> cols(n * dim);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < dim; ++c) cols[c * n + j] = data[j * dim + c];
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(dist.begin(), dist.end(), 0.0);
    for (std::size_t c = 0; c < dim; ++c) {
      const double xi = data[i * dim + c];
      const double* col = cols.data() + c * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double t = xi - col[j];
        dist[j] += t * t;
      }
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::swap(order[0], order[i]);
    auto less = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin() + 1, order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), less);
    std::copy_n(order.begin(), m, out.ids.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return out;
}

IndexTable rank_neighbors(const std::vector<pcio::Vec3>& points, std::size_t m) {
  std::vector<double> flat;
  flat.reserve(points.size() * 3);
  for (const auto& p : points) flat.insert(flat.end(), p.begin(), p.end());
  return rank_neighbors(flat, points.size(), 3, m);
}

std::vector<std::size_t> stride_positions(std::size_t k, std::size_t alpha) {
  std::vector<std::size_t> pos(k);
  for (std::size_t j = 0; j < k; ++j) pos[j] = j << alpha;
  return pos;
}

std::vector<std::size_t> one_key_positions(std::size_t k, std::span<const std::size_t> scales) {
  std::vector<std::size_t> pos;
  pos.reserve(k * scales.size());
  for (std::size_t a : scales) {
    const std::size_t start = k * ((std::size_t{1} << a) - 1);
    for (std::size_t j = 0; j < k; ++j) pos.push_back(start + (j << a));
  }
  return pos;
}

std::size_t required_ranks(std::size_t k, std::span<const std::size_t> scales, KeyMode mode) {
  if (scales.empty()) throw ContractError("at least one scale is required");
  const std::size_t top = *std::max_element(scales.begin(), scales.end());
  if (top >= 32) throw ContractError("scale exponent " + std::to_string(top) + " is too large");
  if (scales.size() == 1 || mode == KeyMode::separate) return k << top;
  return k * ((std::size_t{1} << (top + 1)) - 1);
}

namespace {

std::vector<std::size_t> pick(std::span<const std::size_t> row, const std::vector<std::size_t>& positions,
                              const char* who) {
  std::vector<std::size_t> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= row.size()) {
      throw ContractError(std::string(who) + ": rank " + std::to_string(p) + " needed but the row holds only " +
                          std::to_string(row.size()));
    }
    out.push_back(row[p]);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> stride_select(std::span<const std::size_t> row, std::size_t k, std::size_t alpha) {
  if (row.size() < (k << alpha)) {
    throw ContractError("stride_select: row of " + std::to_string(row.size()) + " is shorter than k*2^alpha = " +
                        std::to_string(k << alpha));
  }
  return pick(row, stride_positions(k, alpha), "stride_select");
}

std::vector<std::size_t> multiscale_one_key(std::span<const std::size_t> row, std::size_t k,
                                            std::span<const std::size_t> scales) {
  const std::size_t need = required_ranks(k, scales, KeyMode::one);
  if (scales.size() > 1 && row.size() < need) {
    throw ContractError("multiscale_one_key: row of " + std::to_string(row.size()) + " is shorter than " +
                        std::to_string(need));
  }
  if (scales.size() == 1) return stride_select(row, k, scales[0]);
  return pick(row, one_key_positions(k, scales), "multiscale_one_key");
}

std::vector<std::vector<std::size_t>> multiscale_separate(std::span<const std::size_t> row, std::size_t k,
                                                          std::span<const std::size_t> scales) {
  required_ranks(k, scales, KeyMode::separate);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t a : scales) groups.push_back(stride_select(row, k, a));
  return groups;
}

std::size_t NeighborIndex::total_slots() const {
  std::size_t s = 0;
  for (const auto& g : groups) s += g.ids.cols;
  return s;
}

NeighborIndex select_neighbors(const IndexTable& ranks, std::size_t k, std::span<const std::size_t> scales,
                               KeyMode mode, Basis basis) {
  if (k == 0) throw ContractError("k must be at least 1");
  const std::size_t need = required_ranks(k, scales, mode);
  if (ranks.cols < need) {
    throw ContractError("rank table has " + std::to_string(ranks.cols) + " columns, selection needs " +
                        std::to_string(need));
  }
  NeighborIndex index;
  index.k = k;
  index.scales.assign(scales.begin(), scales.end());
  index.key_mode = mode;
  index.basis = basis;

  auto make_group = [&](std::vector<std::size_t> positions, std::vector<std::size_t> slot_scale) {
    NeighborGroup g;
    g.ids = IndexTable(ranks.rows, positions.size());
    for (std::size_t i = 0; i < ranks.rows; ++i)
      for (std::size_t s = 0; s < positions.size(); ++s) g.ids.at(i, s) = ranks.at(i, positions[s]);
    g.slot_rank = std::move(positions);
    g.slot_scale = std::move(slot_scale);
    return g;
  };

  if (scales.size() == 1 || mode == KeyMode::one) {
    std::vector<std::size_t> positions =
        scales.size() == 1 ? stride_positions(k, scales[0]) : one_key_positions(k, scales);
    std::vector<std::size_t> slot_scale;
    for (std::size_t a : scales) slot_scale.insert(slot_scale.end(), k, a);
    index.groups.push_back(make_group(std::move(positions), std::move(slot_scale)));
  } else {
    for (std::size_t a : scales) index.groups.push_back(make_group(stride_positions(k, a), std::vector<std::size_t>(k, a)));
  }
  return index;
}

NeighborIndex build_neighbor_index(std::span<const double> data, std::size_t n, std::size_t dim, std::size_t k,
                                   std::span<const std::size_t> scales, KeyMode mode, Basis basis) {
  const std::size_t need = required_ranks(k, scales, mode);
  return select_neighbors(rank_neighbors(data, n, dim, need), k, scales, mode, basis);
}

std::string neighbors_csv(const NeighborIndex& index) {
  std::string out = "point_id,scale,slot,neighbor_id,rank\n";
  const std::size_t n = index.points();
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& g : index.groups) {
      for (std::size_t s = 0; s < g.ids.cols; ++s) {
        out += std::to_string(i) + ',' + std::to_string(g.slot_scale[s]) + ',' + std::to_string(s) + ',' +
               std::to_string(g.ids.at(i, s)) + ',' + std::to_string(g.slot_rank[s]) + '\n';
      }
    }
  }
  return out;
}

}  // namespace pcattn::neighborhood
