#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "affect/errors.hpp"
#include "affect/rng.hpp"

namespace affect {

using MatrixRM =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<MatrixRM>;
using ConstMatMap = Eigen::Map<const MatrixRM>;
using VecMap = Eigen::Map<Eigen::VectorXf>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXf>;

// Dense float tensor, row-major, shape is a small vector of extents.
// All neural-net layers exchange these; Eigen maps give GEMM views.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) { resize(std::move(shape)); }
  Tensor(std::initializer_list<int> shape) {
    resize(std::vector<int>(shape));
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor randn(std::vector<int> shape, Rng& rng, float stddev) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = rng.normal(0.0f, stddev);
    return t;
  }

  void resize(std::vector<int> shape) {
    shape_ = std::move(shape);
    std::int64_t n = 1;
    for (int d : shape_) {
      if (d < 0) throw ContractError("tensor extent must be non-negative");
      n *= d;
    }
    data_.assign(static_cast<std::size_t>(n), 0.0f);
  }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& raw() { return data_; }
  const std::vector<float>& raw() const { return data_; }

  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  void fill(float v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0f); }

  // Metadata-only reshape; element count must be preserved.
  Tensor reshaped(std::vector<int> shape) const {
    Tensor t = *this;
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    if (n != size()) throw ContractError("reshape changes element count");
    t.shape_ = std::move(shape);
    return t;
  }

  // 2-D row-major view; rows*cols must equal size().
  MatMap mat(int rows, int cols) {
    check_view(rows, cols);
    return MatMap(data_.data(), rows, cols);
  }
  ConstMatMap mat(int rows, int cols) const {
    check_view(rows, cols);
    return ConstMatMap(data_.data(), rows, cols);
  }

  VecMap vec() { return VecMap(data_.data(), static_cast<Eigen::Index>(data_.size())); }
  ConstVecMap vec() const {
    return ConstVecMap(data_.data(), static_cast<Eigen::Index>(data_.size()));
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  void check_view(int rows, int cols) const {
    if (static_cast<std::int64_t>(rows) * cols != size())
      throw ContractError("matrix view does not cover tensor");
  }

  std::vector<int> shape_;
  std::vector<float> data_;
};

}  // namespace affect
