#include "kbqa/neural/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kbqa::neural {

GradCheckReport grad_check(Differentiable& model, double h, double tolerance) {
  auto& params = model.parameters();
  Gradients analytic = zeros_like(params);
  model.loss_and_gradient(analytic);

  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!model.checked(i)) continue;
    ParamCheck check{params.name(i), 0.0, true};
    auto values = params[i].values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (!model.checked(i, j)) continue;
      const double saved = values[j];
      values[j] = saved + h;
      const double up = model.loss();
      values[j] = saved - h;
      const double down = model.loss();
      values[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i][j];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      check.max_relative_error = std::max(check.max_relative_error, std::abs(a - numeric) / denom);
    }
    check.pass = check.max_relative_error < tolerance;
    report.pass = report.pass && check.pass;
    if (check.max_relative_error >= report.max_relative_error) {
      report.max_relative_error = check.max_relative_error;
      report.worst = check.name;
    }
    report.params.push_back(std::move(check));
  }
  return report;
}

NetworkObjective::NetworkObjective(Network& network, Example example, double l1_activity,
                                   std::uint64_t seed, bool training)
    : network_(network), example_(std::move(example)), l1_(l1_activity), seed_(seed),
      training_(training) {}

bool NetworkObjective::checked(std::size_t param, std::size_t element) const {
  const auto dim = network_.vocabulary().dimension();
  return param != network_.params().index_of("embedding") || element / dim != kPadId;
}

double NetworkObjective::loss() {
  std::mt19937_64 rng(seed_);
  return network_.loss(example_, l1_, ForwardContext{training_, &rng});
}

double NetworkObjective::loss_and_gradient(Gradients& grads) {
  std::mt19937_64 rng(seed_);
  return network_.loss_and_gradient(example_, l1_, ForwardContext{training_, &rng}, grads);
}

}  // namespace kbqa::neural
