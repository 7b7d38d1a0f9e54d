#pragma once

#include <cstddef>
#include <optional>

#include "pcattn/numerics/ops.hpp"

namespace pcattn::numerics {

/// Weight of shape in x out and an optional bias of shape out.
struct LinearParams {
  Value weight;
  std::optional<Value> bias;

  std::size_t in() const { return weight.shape()[0]; }
  std::size_t out() const { return weight.shape()[1]; }
  std::size_t numel() const;
};

/// Fan-in scaled uniform init with variance gain / in, i.e.
/// U(-sqrt(3 gain / in), sqrt(3 gain / in)). Use gain 2 ahead of a relu.
/// Bias-free unless asked.
LinearParams make_linear(std::size_t in, std::size_t out, Rng& rng, bool bias = false, double gain = 1.0);
LinearParams zero_linear(std::size_t in, std::size_t out, bool bias = false);

/// x[..., in] -> x . weight (+ bias).
Value linear(const Value& x, const LinearParams& p);

/// Uniform leaf in [-bound, bound].
Value uniform_parameter(Shape shape, double bound, Rng& rng);

}  // namespace pcattn::numerics
