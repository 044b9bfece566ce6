#include "kbqa/neural/kernels.hpp"

#include <algorithm>
#include <cstdint>

#include "kbqa/error.hpp"

namespace kbqa::neural::kernels {
namespace {

void check_gemv(MatrixView a, std::size_t x_size, std::size_t y_size) {
  if (a.values.size() != a.rows * a.cols || x_size != a.cols || y_size != a.rows)
    throw ShapeError("gemv: shape mismatch");
}

void check_gemv_t(MatrixView a, std::size_t x_size, std::size_t y_size) {
  if (a.values.size() != a.rows * a.cols || x_size != a.rows || y_size != a.cols)
    throw ShapeError("gemv_t: shape mismatch");
}

inline double row_dot(const double* row, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
  return acc;
}

inline double conv_at(const double* in, std::size_t t, std::size_t channels, const double* filter,
                      std::size_t width, double bias) {
  double acc = bias;
  for (std::size_t j = 0; j < width; ++j) {
    // padded row t + j maps to input row t + j - (width - 1)
    if (t + j < width - 1) continue;
    const double* x = in + (t + j - (width - 1)) * channels;
    const double* w = filter + j * channels;
    for (std::size_t k = 0; k < channels; ++k) acc += w[k] * x[k];
  }
  return acc;
}

constexpr std::size_t kColumnBlock = 64;

}  // namespace

namespace serial {

void gemv(MatrixView a, std::span<const double> x, std::span<double> y, bool accumulate) {
  check_gemv(a, x.size(), y.size());
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double acc = row_dot(a.values.data() + i * a.cols, x.data(), a.cols);
    y[i] = accumulate ? y[i] + acc : acc;
  }
}

void gemv_t(MatrixView a, std::span<const double> x, std::span<double> y) {
  check_gemv_t(a, x.size(), y.size());
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double xi = x[i];
    const double* row = a.values.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) y[j] += row[j] * xi;
  }
}

void ger(std::span<double> a, std::size_t rows, std::size_t cols, std::span<const double> u,
         std::span<const double> v) {
  if (a.size() != rows * cols || u.size() != rows || v.size() != cols)
    throw ShapeError("ger: shape mismatch");
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = a.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += u[i] * v[j];
  }
}

void conv1d_same(std::span<const double> in, std::size_t steps, std::size_t channels,
                 std::span<const double> filters, std::size_t n_filters, std::size_t width,
                 std::span<const double> bias, std::span<double> out) {
  if (in.size() != steps * channels || filters.size() != n_filters * width * channels ||
      bias.size() != n_filters || out.size() != steps * n_filters || width == 0)
    throw ShapeError("conv1d: shape mismatch");
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t f = 0; f < n_filters; ++f)
      out[t * n_filters + f] =
          conv_at(in.data(), t, channels, filters.data() + f * width * channels, width, bias[f]);
}

}  // namespace serial

namespace parallel {

void gemv(MatrixView a, std::span<const double> x, std::span<double> y, bool accumulate) {
  check_gemv(a, x.size(), y.size());
  const auto rows = static_cast<std::int64_t>(a.rows);
  const bool wide = a.rows * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double acc = row_dot(a.values.data() + i * a.cols, x.data(), a.cols);
    y[i] = accumulate ? y[i] + acc : acc;
  }
}

void gemv_t(MatrixView a, std::span<const double> x, std::span<double> y) {
  check_gemv_t(a, x.size(), y.size());
  const auto blocks = static_cast<std::int64_t>((a.cols + kColumnBlock - 1) / kColumnBlock);
  const bool wide = a.rows * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kColumnBlock;
    const std::size_t end = std::min(a.cols, begin + kColumnBlock);
    for (std::size_t i = 0; i < a.rows; ++i) {
      const double xi = x[i];
      const double* row = a.values.data() + i * a.cols;
      for (std::size_t j = begin; j < end; ++j) y[j] += row[j] * xi;
    }
  }
}

void ger(std::span<double> a, std::size_t rows, std::size_t cols, std::span<const double> u,
         std::span<const double> v) {
  if (a.size() != rows * cols || u.size() != rows || v.size() != cols)
    throw ShapeError("ger: shape mismatch");
  const bool wide = rows * cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows); ++i) {
    double* row = a.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += u[i] * v[j];
  }
}

void conv1d_same(std::span<const double> in, std::size_t steps, std::size_t channels,
                 std::span<const double> filters, std::size_t n_filters, std::size_t width,
                 std::span<const double> bias, std::span<double> out) {
  if (in.size() != steps * channels || filters.size() != n_filters * width * channels ||
      bias.size() != n_filters || out.size() != steps * n_filters || width == 0)
    throw ShapeError("conv1d: shape mismatch");
  const bool wide = steps * n_filters * width * channels >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(steps); ++t)
    for (std::size_t f = 0; f < n_filters; ++f)
      out[t * n_filters + f] =
          conv_at(in.data(), t, channels, filters.data() + f * width * channels, width, bias[f]);
}

}  // namespace parallel
}  // namespace kbqa::neural::kernels
