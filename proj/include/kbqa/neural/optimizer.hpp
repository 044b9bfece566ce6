#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "kbqa/neural/tensor.hpp"

namespace kbqa::neural {

enum class OptimizerKind {
  SGD,
  ADAM_COUPLED,    // weight decay folded into the gradient before the moments
  ADAM_DECOUPLED,  // weight decay applied to the parameters directly
};

std::string_view to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::SGD;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  std::size_t step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// One update of every parameter whose mask entry is set (all when the mask
/// is empty).
void optimizer_step(OptimizerState& state, ParameterSet& params, const Gradients& grads,
                    const std::vector<bool>& mask = {});

}  // namespace kbqa::neural
