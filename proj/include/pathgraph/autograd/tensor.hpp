#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pathgraph::ag {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major array of doubles. Primitives operate on rank-2 tensors;
/// higher ranks exist only as storage (e.g. spline kernels, P x d_in x d_out)
/// and are reshaped to rank 2 before entering a tape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor scalar(double value) { return Tensor({1, 1}, value); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Rank-2 accessors; throw a shape error for other ranks.
  std::size_t rows() const {
    if (shape_.size() != 2) [[unlikely]] rank_error();
    return shape_[0];
  }
  std::size_t cols() const {
    if (shape_.size() != 2) [[unlikely]] rank_error();
    return shape_[1];
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  double item() const;

  /// Same data under a new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  void fill(double value);
  /// this += other (shapes must match).
  void accumulate(const Tensor& other);

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  [[noreturn]] void rank_error() const;

  Shape shape_;
  std::vector<double> data_;
};

}  // namespace pathgraph::ag
