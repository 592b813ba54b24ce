#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lwct {

// Dense 3D array in C order: the last index varies fastest.
template <class T>
class Array3 {
 public:
  using value_type = T;

  Array3() = default;
  Array3(std::size_t n0, std::size_t n1, std::size_t n2, T fill = T{})
      : extents_{n0, n1, n2}, data_(n0 * n1 * n2, fill) {}

  std::size_t extent(std::size_t axis) const { return extents_[axis]; }
  const std::array<std::size_t, 3>& extents() const { return extents_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * extents_[1] + j) * extents_[2] + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * extents_[1] + j) * extents_[2] + k];
  }

  // Contiguous 2D plane for a fixed first index.
  std::span<T> plane(std::size_t i) {
    const std::size_t n = extents_[1] * extents_[2];
    return {data_.data() + i * n, n};
  }
  std::span<const T> plane(std::size_t i) const {
    const std::size_t n = extents_[1] * extents_[2];
    return {data_.data() + i * n, n};
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

  bool operator==(const Array3&) const = default;

 private:
  std::array<std::size_t, 3> extents_{0, 0, 0};
  std::vector<T> data_;
};

}  // namespace lwct
