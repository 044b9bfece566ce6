#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kbqa::neural {

/// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0) : Tensor({rows, cols}, fill) {}

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  // 2-D views; rank-1 tensors are one row.
  std::size_t rows() const { return shape_.size() >= 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : values_.size() / rows(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  void fill(double v);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// Named trainable tensors in registration order.
class ParameterSet {
 public:
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t index_of(const std::string& name) const;

  Tensor& operator[](std::size_t i) { return values_[i]; }
  const Tensor& operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

/// Gradient buffers aligned index-for-index with a ParameterSet.
using Gradients = std::vector<Tensor>;

Gradients zeros_like(const ParameterSet& params);
void scale(Gradients& grads, double factor);
void add_into(Gradients& acc, const Gradients& other);

}  // namespace kbqa::neural
