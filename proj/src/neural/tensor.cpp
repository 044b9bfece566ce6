#include "kbqa/neural/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "kbqa/error.hpp"

namespace kbqa::neural {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  std::size_t n = 1;
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape_));
    n *= d;
  }
  values_.assign(n, fill);
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t ParameterSet::add(std::string name, std::vector<std::size_t> shape) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end())
    throw std::invalid_argument("duplicate parameter " + name);
  names_.push_back(std::move(name));
  values_.emplace_back(std::move(shape));
  return values_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : values_) n += t.size();
  return n;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("no parameter named " + name);
  return static_cast<std::size_t>(it - names_.begin());
}

Gradients zeros_like(const ParameterSet& params) {
  Gradients g;
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) g.emplace_back(params[i].shape());
  return g;
}

void scale(Gradients& grads, double factor) {
  for (auto& t : grads)
    for (auto& v : t.values()) v *= factor;
}

void add_into(Gradients& acc, const Gradients& other) {
  if (acc.size() != other.size()) throw ShapeError("gradient sets differ in size");
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto a = acc[i].values();
    auto b = other[i].values();
    if (a.size() != b.size()) throw ShapeError("gradient tensors differ in size");
    for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
  }
}

}  // namespace kbqa::neural
