#include "pcattn/numerics/shape.hpp"

#include <sstream>

#include "pcattn/errors.hpp"

namespace pcattn::numerics {

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate(); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate(); }

void Shape::validate() const {
  for (std::size_t d : dims_) {
    if (d == 0) throw DimensionError("shape " + str() + " has a zero extent");
  }
}

std::size_t Shape::numel() const noexcept {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << ", ";
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace pcattn::numerics
