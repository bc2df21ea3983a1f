#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "hosc/matrix.hpp"
#include "hosc/mlp.hpp"

namespace hosc {

struct LossResult {
  double loss = 0.0;
  Matrix d_pred;
};

/// Mean over all elements of (pred - target)² and its gradient 2 (pred - target) / count.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

/// Optional L2 regularizer lambda * sum of squared weights (biases and
/// sharpness excluded). Adds its gradient into `grads` and returns its value.
double add_weight_decay(const Mlp& mlp, double lambda, Gradients& grads);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::size_t step_count = 0;
  Gradients first_moment;
  Gradients second_moment;
};

AdamState make_adam_state(const Mlp& mlp, AdamConfig config = {});

/// One bias-corrected Adam update of weights, biases and trainable
/// log-sharpness values, all at learning rate `lr`.
void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state, double lr);

struct ConstantLr {
  friend bool operator==(const ConstantLr&, const ConstantLr&) = default;
};

/// lr = base * gamma^floor(epoch / every)
struct StepDecayLr {
  double gamma = 0.1;
  std::size_t every = 2000;
  friend bool operator==(const StepDecayLr&, const StepDecayLr&) = default;
};

using LrSchedule = std::variant<ConstantLr, StepDecayLr>;

void validate(const LrSchedule& schedule);
double lr_at(const LrSchedule& schedule, double base_lr, std::size_t epoch);

}  // namespace hosc
