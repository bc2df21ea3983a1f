#include "hosc/optim.hpp"

#include <cmath>
#include <string>

#include "hosc/error.hpp"

namespace hosc {

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse_loss: prediction " + pred.shape_string() + " vs target " +
                         target.shape_string());
  }
  LossResult result{0.0, Matrix(pred.rows(), pred.cols())};
  const std::size_t n = pred.size();
  if (n == 0) return result;
  auto p = pred.values();
  auto t = target.values();
  auto d = result.d_pred.values();
  const double inv = 1.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = p[i] - t[i];
    sum += r * r;
    d[i] = 2.0 * r * inv;
  }
  result.loss = sum * inv;
  return result;
}

double add_weight_decay(const Mlp& mlp, double lambda, Gradients& grads) {
  if (lambda == 0.0) return 0.0;
  double penalty = 0.0;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    auto w = mlp.weights[l].values();
    auto g = grads.d_weights[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      penalty += w[i] * w[i];
      g[i] += 2.0 * lambda * w[i];
    }
  }
  return lambda * penalty;
}

AdamState make_adam_state(const Mlp& mlp, AdamConfig config) {
  return AdamState{config, 0, zero_gradients(mlp), zero_gradients(mlp)};
}

namespace {

struct AdamCoefficients {
  double beta1, beta2, epsilon, lr, correction1, correction2;
};

inline void adam_update(double& param, double grad, double& m, double& v, const AdamCoefficients& k) {
  m = k.beta1 * m + (1.0 - k.beta1) * grad;
  v = k.beta2 * v + (1.0 - k.beta2) * grad * grad;
  const double m_hat = m / k.correction1;
  const double v_hat = v / k.correction2;
  param -= k.lr * m_hat / (std::sqrt(v_hat) + k.epsilon);
}

void update_matrices(std::vector<Matrix>& params, const std::vector<Matrix>& grads,
                     std::vector<Matrix>& m, std::vector<Matrix>& v, const AdamCoefficients& k) {
  for (std::size_t l = 0; l < params.size(); ++l) {
    auto p = params[l].values();
    auto g = grads[l].values();
    auto mm = m[l].values();
    auto vv = v[l].values();
    for (std::size_t i = 0; i < p.size(); ++i) adam_update(p[i], g[i], mm[i], vv[i], k);
  }
}

bool shapes_match(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
  }
  return true;
}

}  // namespace

void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state, double lr) {
  const bool ok = shapes_match(mlp.weights, grads.d_weights) &&
                  shapes_match(mlp.biases, grads.d_biases) &&
                  shapes_match(mlp.weights, state.first_moment.d_weights) &&
                  shapes_match(mlp.weights, state.second_moment.d_weights) &&
                  shapes_match(mlp.biases, state.first_moment.d_biases) &&
                  shapes_match(mlp.biases, state.second_moment.d_biases) &&
                  grads.d_log_sharp.size() == mlp.log_sharp.size() &&
                  state.first_moment.d_log_sharp.size() == mlp.log_sharp.size() &&
                  state.second_moment.d_log_sharp.size() == mlp.log_sharp.size();
  if (!ok) throw ContractError("adam_step: optimizer state or gradients do not match the network");

  ++state.step_count;
  const auto& c = state.config;
  const auto t = static_cast<double>(state.step_count);
  const AdamCoefficients k{c.beta1, c.beta2, c.epsilon, lr, 1.0 - std::pow(c.beta1, t),
                           1.0 - std::pow(c.beta2, t)};

  update_matrices(mlp.weights, grads.d_weights, state.first_moment.d_weights,
                  state.second_moment.d_weights, k);
  update_matrices(mlp.biases, grads.d_biases, state.first_moment.d_biases,
                  state.second_moment.d_biases, k);
  for (std::size_t l = 0; l < mlp.log_sharp.size(); ++l) {
    if (!is_trainable_hosc(mlp.spec.activation_per_layer[l])) continue;
    adam_update(mlp.log_sharp[l], grads.d_log_sharp[l], state.first_moment.d_log_sharp[l],
                state.second_moment.d_log_sharp[l], k);
  }
}

void validate(const LrSchedule& schedule) {
  if (const auto* s = std::get_if<StepDecayLr>(&schedule)) {
    if (!(s->gamma > 0.0 && s->gamma <= 1.0)) {
      throw ArgumentError("step schedule gamma must be in (0, 1], got " + std::to_string(s->gamma));
    }
    if (s->every < 1) throw ArgumentError("step schedule period must be >= 1");
  }
}

double lr_at(const LrSchedule& schedule, double base_lr, std::size_t epoch) {
  if (const auto* s = std::get_if<StepDecayLr>(&schedule)) {
    return base_lr * std::pow(s->gamma, static_cast<double>(epoch / s->every));
  }
  return base_lr;
}

}  // namespace hosc
