#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcattn/numerics/ops.hpp"
#include "pcattn/pcio/point_cloud.hpp"

namespace pcattn::neighborhood {

using numerics::IndexTable;

/// Space in which neighbors are ranked.
enum class Basis { coords, features };

/// How several scales are fed to attention: concatenated into one key set,
/// or attended separately per scale.
enum class KeyMode { one, separate };

std::string_view to_string(Basis b);
std::string_view to_string(KeyMode m);

/// Row i lists the m nearest rows of `data` (n x dim, row-major) to row i by
/// Euclidean distance. Row i itself is always rank 0; the rest are ordered by
/// (distance, index). Brute force, O(n^2 dim).
IndexTable rank_neighbors(std::span<const double> data, std::size_t n, std::size_t dim, std::size_t m);
IndexTable rank_neighbors(const std::vector<pcio::Vec3>& points, std::size_t m);

/// Rank positions {0, 2^a, ..., (k-1) 2^a}.
std::vector<std::size_t> stride_positions(std::size_t k, std::size_t alpha);

/// Rank positions of the concatenated one-key scales. Scale a starts at
/// k (2^a - 1), so consecutive scales occupy disjoint rank segments.
std::vector<std::size_t> one_key_positions(std::size_t k, std::span<const std::size_t> scales);

/// Number of ranked neighbors a row must hold for the given selection. A
/// single scale is plain strided selection whatever the key mode.
std::size_t required_ranks(std::size_t k, std::span<const std::size_t> scales, KeyMode mode);

std::vector<std::size_t> stride_select(std::span<const std::size_t> row, std::size_t k, std::size_t alpha);
std::vector<std::size_t> multiscale_one_key(std::span<const std::size_t> row, std::size_t k,
                                            std::span<const std::size_t> scales);
std::vector<std::vector<std::size_t>> multiscale_separate(std::span<const std::size_t> row, std::size_t k,
                                                          std::span<const std::size_t> scales);

/// One attention key set: ids(i, slot) with the rank and scale each slot
/// came from.
struct NeighborGroup {
  IndexTable ids;
  std::vector<std::size_t> slot_rank;
  std::vector<std::size_t> slot_scale;
};

struct NeighborIndex {
  std::size_t k = 0;
  std::vector<std::size_t> scales;
  KeyMode key_mode = KeyMode::one;
  Basis basis = Basis::coords;
  /// One group for one-key mode (or a single scale), one per scale otherwise.
  std::vector<NeighborGroup> groups;

  std::size_t points() const { return groups.empty() ? 0 : groups.front().ids.rows; }
  /// Total slots per point across groups.
  std::size_t total_slots() const;
};

/// Applies the selection rule to every row of a rank table.
NeighborIndex select_neighbors(const IndexTable& ranks, std::size_t k, std::span<const std::size_t> scales,
                               KeyMode mode, Basis basis);

/// Ranks `data` (n x dim) and selects in one call.
NeighborIndex build_neighbor_index(std::span<const double> data, std::size_t n, std::size_t dim, std::size_t k,
                                   std::span<const std::size_t> scales, KeyMode mode, Basis basis);

/// CSV with header point_id,scale,slot,neighbor_id,rank. Slots count within
/// each group.
std::string neighbors_csv(const NeighborIndex& index);

}  // namespace pcattn::neighborhood
