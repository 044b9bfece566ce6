#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kbqa/neural/network.hpp"
#include "kbqa/neural/tensor.hpp"

namespace kbqa::neural {

/// Anything with parameters, a scalar loss and an analytic gradient.
class Differentiable {
 public:
  virtual ~Differentiable() = default;
  virtual ParameterSet& parameters() = 0;
  virtual bool checked(std::size_t /*param*/) const { return true; }
  virtual bool checked(std::size_t /*param*/, std::size_t /*element*/) const { return true; }
  virtual double loss() = 0;
  virtual double loss_and_gradient(Gradients& grads) = 0;
};

struct ParamCheck {
  std::string name;
  double max_relative_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  bool pass = true;
  double max_relative_error = 0.0;
  std::string worst;  // name of the parameter with the largest error
};

/// Central differences on every scalar of every checked parameter. Relative
/// error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradCheckReport grad_check(Differentiable& model, double h, double tolerance);

/// A network on one example. Every evaluation reseeds the dropout generator,
/// so the masks are fixed and the loss is a smooth function of the weights.
class NetworkObjective final : public Differentiable {
 public:
  NetworkObjective(Network& network, Example example, double l1_activity, std::uint64_t seed,
                   bool training = true);

  ParameterSet& parameters() override { return network_.params(); }
  bool checked(std::size_t param) const override { return network_.trainable(param); }
  // The pad row is a constant zero vector.
  bool checked(std::size_t param, std::size_t element) const override;
  double loss() override;
  double loss_and_gradient(Gradients& grads) override;

 private:
  Network& network_;
  Example example_;
  double l1_;
  std::uint64_t seed_;
  bool training_;
};

}  // namespace kbqa::neural
