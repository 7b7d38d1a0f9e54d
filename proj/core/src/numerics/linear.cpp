#include "pcattn/numerics/linear.hpp"

#include <cmath>

#include "pcattn/errors.hpp"

namespace pcattn::numerics {

std::size_t LinearParams::numel() const { return weight.numel() + (bias ? bias->numel() : 0); }

Value uniform_parameter(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(shape.numel());
  for (double& v : data) v = dist(rng);
  return Value::parameter(std::move(shape), std::move(data));
}

LinearParams make_linear(std::size_t in, std::size_t out, Rng& rng, bool bias, double gain) {
  const double bound = std::sqrt(3.0 * gain / static_cast<double>(in));
  LinearParams p;
  p.weight = uniform_parameter(Shape{in, out}, bound, rng);
  if (bias) p.bias = uniform_parameter(Shape{out}, bound, rng);
  return p;
}

LinearParams zero_linear(std::size_t in, std::size_t out, bool bias) {
  LinearParams p;
  p.weight = Value::zeros(Shape{in, out}, true);
  if (bias) p.bias = Value::zeros(Shape{out}, true);
  return p;
}

Value linear(const Value& x, const LinearParams& p) {
  if (x.rank() == 0 || x.shape().back() != p.in()) {
    throw DimensionError("linear: input " + x.shape().str() + " does not match weight " +
                         p.weight.shape().str());
  }
  Value y = matmul(x, p.weight);
  if (p.bias) y = add(y, *p.bias);
  return y;
}

}  // namespace pcattn::numerics
