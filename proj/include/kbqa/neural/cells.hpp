#pragma once

#include <span>
#include <vector>

#include "kbqa/neural/tensor.hpp"

namespace kbqa::neural {

// Gate blocks are stacked along the first axis.
//   GRU:  input [3H x d], recurrent [3H x H], bias [3H]; order z, r, candidate
//   LSTM: input [4H x d], recurrent [4H x H], bias [4H]; order i, f, g, o
struct CellWeights {
  const Tensor& input;
  const Tensor& recurrent;
  const Tensor& bias;
};

struct CellGrads {
  Tensor& input;
  Tensor& recurrent;
  Tensor& bias;
};

struct GruStep {
  std::vector<double> z, r, candidate, h;
};

struct LstmStep {
  std::vector<double> i, f, g, o, c, tanh_c, h;
};

double sigmoid(double x);

/// z = s(Wz x + Uz h + bz), r = s(Wr x + Ur h + br),
/// n = tanh(Wn x + Un (r*h) + bn), h' = z*h + (1-z)*n
GruStep gru_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                         const CellWeights& w);

/// Accumulates parameter gradients; adds into dx and dh_prev.
void gru_cell_backward(std::span<const double> x, std::span<const double> h_prev,
                       const GruStep& step, std::span<const double> dh, const CellWeights& w,
                       CellGrads g, std::span<double> dx, std::span<double> dh_prev);

/// c' = f*c + i*g, h' = o*tanh(c')
LstmStep lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev,
                           std::span<const double> c_prev, const CellWeights& w);

/// dh, dc are the gradients flowing into this step's outputs. Adds into dx,
/// dh_prev and dc_prev.
void lstm_cell_backward(std::span<const double> x, std::span<const double> h_prev,
                        std::span<const double> c_prev, const LstmStep& step,
                        std::span<const double> dh, std::span<const double> dc,
                        const CellWeights& w, CellGrads g, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev);

}  // namespace kbqa::neural
