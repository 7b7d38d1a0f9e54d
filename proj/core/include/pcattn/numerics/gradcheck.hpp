#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcattn/numerics/value.hpp"

namespace pcattn::numerics {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  double denominator_floor = 1e-8;
  /// Entries failing at `step` are re-probed with a fourth-order stencil at
  /// `step` and 100 `step`, then centrally at step/100 and step/10000; a pass
  /// at the smaller steps means the coarse probe straddled a relu/max kink.
  bool refine_kinks = true;
};

struct GradCheckGroup {
  std::string name;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  std::size_t refined = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  bool passed() const;
  double max_rel_error() const;
};

/// Compares reverse-mode gradients of `loss()` against central differences
/// for every entry of every named leaf. `loss` must rebuild its graph on
/// each call from the current leaf values.
GradCheckReport check_gradients(const std::function<Value()>& loss,
                                const std::vector<std::pair<std::string, Value>>& leaves,
                                const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double floor = 1e-8);

}  // namespace pcattn::numerics
