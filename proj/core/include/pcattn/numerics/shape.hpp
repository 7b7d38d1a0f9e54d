#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace pcattn::numerics {

/// Ordered list of extents, each >= 1. Rank 0 is a scalar.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t operator[](std::size_t axis) const { return dims_.at(axis); }
  std::size_t numel() const noexcept;
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t back() const { return dims_.back(); }

  std::string str() const;

  bool operator==(const Shape&) const = default;

 private:
  void validate() const;
  std::vector<std::size_t> dims_;
};

}  // namespace pcattn::numerics
