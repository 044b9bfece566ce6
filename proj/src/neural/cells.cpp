#include "kbqa/neural/cells.hpp"

#include <cmath>

#include "kbqa/error.hpp"
#include "kbqa/neural/kernels.hpp"

namespace kbqa::neural {
namespace {

using kernels::MatrixView;

// Rows [begin, begin + count) of a stacked gate matrix.
MatrixView block(const Tensor& m, std::size_t begin, std::size_t count) {
  const auto cols = m.cols();
  return {m.values().subspan(begin * cols, count * cols), count, cols};
}

std::span<double> block(Tensor& m, std::size_t begin, std::size_t count) {
  const auto cols = m.cols();
  return m.values().subspan(begin * cols, count * cols);
}

void check_cell(const CellWeights& w, std::size_t gates, std::size_t d, std::size_t h) {
  if (w.input.rows() != gates * h || w.input.cols() != d || w.recurrent.rows() != gates * h ||
      w.recurrent.cols() != h || w.bias.size() != gates * h)
    throw ShapeError("recurrent cell: weight shapes inconsistent with input " +
                     std::to_string(d) + " / hidden " + std::to_string(h));
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GruStep gru_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                         const CellWeights& w) {
  const auto H = h_prev.size();
  check_cell(w, 3, x.size(), H);

  std::vector<double> pre(3 * H);
  kernels::gemv({w.input.values(), 3 * H, x.size()}, x, pre, false);
  std::vector<double> rec(2 * H);
  kernels::gemv(block(w.recurrent, 0, 2 * H), h_prev, rec, false);

  GruStep s;
  s.z.resize(H);
  s.r.resize(H);
  s.candidate.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.z[k] = sigmoid(pre[k] + rec[k] + w.bias[k]);
    s.r[k] = sigmoid(pre[H + k] + rec[H + k] + w.bias[H + k]);
  }
  std::vector<double> gated(H);
  for (std::size_t k = 0; k < H; ++k) gated[k] = s.r[k] * h_prev[k];
  std::vector<double> cand(H);
  kernels::gemv(block(w.recurrent, 2 * H, H), gated, cand, false);
  for (std::size_t k = 0; k < H; ++k) {
    s.candidate[k] = std::tanh(pre[2 * H + k] + cand[k] + w.bias[2 * H + k]);
    s.h[k] = s.z[k] * h_prev[k] + (1.0 - s.z[k]) * s.candidate[k];
  }
  return s;
}

void gru_cell_backward(std::span<const double> x, std::span<const double> h_prev,
                       const GruStep& s, std::span<const double> dh, const CellWeights& w,
                       CellGrads g, std::span<double> dx, std::span<double> dh_prev) {
  const auto H = h_prev.size();
  const auto d = x.size();

  std::vector<double> da(3 * H);  // pre-activation gradients, order z, r, candidate
  for (std::size_t k = 0; k < H; ++k) {
    const double dz = dh[k] * (h_prev[k] - s.candidate[k]);
    const double dn = dh[k] * (1.0 - s.z[k]);
    dh_prev[k] += dh[k] * s.z[k];
    da[k] = dz * s.z[k] * (1.0 - s.z[k]);
    da[2 * H + k] = dn * (1.0 - s.candidate[k] * s.candidate[k]);
  }

  // candidate path through U_n (r * h_prev)
  std::vector<double> gated(H);
  for (std::size_t k = 0; k < H; ++k) gated[k] = s.r[k] * h_prev[k];
  std::span<const double> da_n(da.data() + 2 * H, H);
  std::vector<double> d_gated(H, 0.0);
  kernels::gemv_t(block(w.recurrent, 2 * H, H), da_n, d_gated);
  kernels::ger(block(g.recurrent, 2 * H, H), H, H, da_n, gated);
  for (std::size_t k = 0; k < H; ++k) {
    dh_prev[k] += d_gated[k] * s.r[k];
    const double dr = d_gated[k] * h_prev[k];
    da[H + k] = dr * s.r[k] * (1.0 - s.r[k]);
  }

  std::span<const double> da_zr(da.data(), 2 * H);
  kernels::gemv_t(block(w.recurrent, 0, 2 * H), da_zr, dh_prev);
  kernels::ger(block(g.recurrent, 0, 2 * H), 2 * H, H, da_zr, h_prev);

  kernels::gemv_t({w.input.values(), 3 * H, d}, da, dx);
  kernels::ger(g.input.values(), 3 * H, d, da, x);
  for (std::size_t k = 0; k < 3 * H; ++k) g.bias[k] += da[k];
}

LstmStep lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                           std::span<const double> c_prev, const CellWeights& w) {
  const auto H = h_prev.size();
  check_cell(w, 4, x.size(), H);
  if (c_prev.size() != H) throw ShapeError("lstm: cell state size mismatch");

  std::vector<double> pre(4 * H);
  kernels::gemv({w.input.values(), 4 * H, x.size()}, x, pre, false);
  kernels::gemv({w.recurrent.values(), 4 * H, H}, h_prev, pre, true);

  LstmStep s;
  s.i.resize(H);
  s.f.resize(H);
  s.g.resize(H);
  s.o.resize(H);
  s.c.resize(H);
  s.tanh_c.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(pre[k] + w.bias[k]);
    s.f[k] = sigmoid(pre[H + k] + w.bias[H + k]);
    s.g[k] = std::tanh(pre[2 * H + k] + w.bias[2 * H + k]);
    s.o[k] = sigmoid(pre[3 * H + k] + w.bias[3 * H + k]);
    s.c[k] = s.f[k] * c_prev[k] + s.i[k] * s.g[k];
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

void lstm_cell_backward(std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev, const LstmStep& s,
                        std::span<const double> dh, std::span<const double> dc,
                        const CellWeights& w, CellGrads g, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev) {
  const auto H = h_prev.size();
  const auto d = x.size();

  std::vector<double> da(4 * H);
  for (std::size_t k = 0; k < H; ++k) {
    const double d_o = dh[k] * s.tanh_c[k];
    const double d_c = dc[k] + dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
    const double d_i = d_c * s.g[k];
    const double d_g = d_c * s.i[k];
    const double d_f = d_c * c_prev[k];
    dc_prev[k] += d_c * s.f[k];
    da[k] = d_i * s.i[k] * (1.0 - s.i[k]);
    da[H + k] = d_f * s.f[k] * (1.0 - s.f[k]);
    da[2 * H + k] = d_g * (1.0 - s.g[k] * s.g[k]);
    da[3 * H + k] = d_o * s.o[k] * (1.0 - s.o[k]);
  }
  kernels::gemv_t({w.recurrent.values(), 4 * H, H}, da, dh_prev);
  kernels::ger(g.recurrent.values(), 4 * H, H, da, h_prev);
  kernels::gemv_t({w.input.values(), 4 * H, d}, da, dx);
  kernels::ger(g.input.values(), 4 * H, d, da, x);
  for (std::size_t k = 0; k < 4 * H; ++k) g.bias[k] += da[k];
}

}  // namespace kbqa::neural
