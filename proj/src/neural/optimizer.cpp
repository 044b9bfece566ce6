#include "kbqa/neural/optimizer.hpp"

#include <cmath>

#include "kbqa/error.hpp"

namespace kbqa::neural {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::SGD: return "sgd";
    case OptimizerKind::ADAM_COUPLED: return "adam_coupled";
    case OptimizerKind::ADAM_DECOUPLED: return "adam_decoupled";
  }
  return "sgd";
}

std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::SGD;
  if (name == "adam" || name == "adam_coupled") return OptimizerKind::ADAM_COUPLED;
  if (name == "adamw" || name == "adam_decoupled") return OptimizerKind::ADAM_DECOUPLED;
  return std::nullopt;
}

void optimizer_step(OptimizerState& s, ParameterSet& params, const Gradients& grads,
                    const std::vector<bool>& mask) {
  if (grads.size() != params.size()) throw ShapeError("optimizer: gradients do not match params");
  ++s.step_count;

  if (s.kind == OptimizerKind::SGD) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!mask.empty() && !mask[i]) continue;
      auto p = params[i].values();
      auto g = grads[i].values();
      for (std::size_t j = 0; j < p.size(); ++j)
        p[j] -= s.learning_rate * (g[j] + s.weight_decay * p[j]);
    }
    return;
  }

  if (s.first_moment.size() != params.size()) {
    s.first_moment.clear();
    s.second_moment.clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      s.first_moment.emplace_back(params[i].shape());
      s.second_moment.emplace_back(params[i].shape());
    }
  }
  const auto t = static_cast<double>(s.step_count);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  const bool coupled = s.kind == OptimizerKind::ADAM_COUPLED;

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    auto p = params[i].values();
    auto g = grads[i].values();
    auto m = s.first_moment[i].values();
    auto v = s.second_moment[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double grad = coupled ? g[j] + s.weight_decay * p[j] : g[j];
      m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * grad;
      v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * grad * grad;
      const double step = (m[j] / c1) / (std::sqrt(v[j] / c2) + s.epsilon);
      if (coupled)
        p[j] -= s.learning_rate * step;
      else
        p[j] -= s.learning_rate * (step + s.weight_decay * p[j]);
    }
  }
}

}  // namespace kbqa::neural
