#pragma once

// Dense inner loops used by the recurrent and convolutional layers.
//
// Each kernel exists twice: `serial` is the plain reference loop and
// `parallel` splits the output across OpenMP threads. Every output element is
// reduced by exactly one thread in the same order as the serial loop, so the
// two agree bit-for-bit. The unqualified entry points dispatch to `parallel`
// and fall back to one thread below kParallelThreshold multiply-adds.

#include <cstddef>
#include <span>

namespace kbqa::neural::kernels {

inline constexpr std::size_t kParallelThreshold = 1 << 15;

struct MatrixView {
  std::span<const double> values;  // rows x cols, row-major
  std::size_t rows;
  std::size_t cols;
};

namespace serial {
// y = A x, or y += A x when accumulate is set.
void gemv(MatrixView a, std::span<const double> x, std::span<double> y, bool accumulate);
// y += A^T x
void gemv_t(MatrixView a, std::span<const double> x, std::span<double> y);
// A += u v^T
void ger(std::span<double> a, std::size_t rows, std::size_t cols, std::span<const double> u,
         std::span<const double> v);
// out[t][f] = bias[f] + sum_j sum_k filters[f][j][k] * in[t + j - (width - 1)][k]
// (rows before the start read as zero); out is T x F.
void conv1d_same(std::span<const double> in, std::size_t steps, std::size_t channels,
                 std::span<const double> filters, std::size_t n_filters, std::size_t width,
                 std::span<const double> bias, std::span<double> out);
}  // namespace serial

namespace parallel {
void gemv(MatrixView a, std::span<const double> x, std::span<double> y, bool accumulate);
void gemv_t(MatrixView a, std::span<const double> x, std::span<double> y);
void ger(std::span<double> a, std::size_t rows, std::size_t cols, std::span<const double> u,
         std::span<const double> v);
void conv1d_same(std::span<const double> in, std::size_t steps, std::size_t channels,
                 std::span<const double> filters, std::size_t n_filters, std::size_t width,
                 std::span<const double> bias, std::span<double> out);
}  // namespace parallel

using parallel::conv1d_same;
using parallel::gemv;
using parallel::gemv_t;
using parallel::ger;

}  // namespace kbqa::neural::kernels
