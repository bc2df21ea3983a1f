#pragma once

// Shared test oracles: central finite differences on the training loss and
// a brute-force polygon distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "hosc/activation.hpp"
#include "hosc/matrix.hpp"
#include "hosc/mlp.hpp"
#include "hosc/optim.hpp"
#include "hosc/rng.hpp"

namespace hosc::testing {

inline double loss_of(const Mlp& mlp, const Matrix& x, const Matrix& y) {
  const Matrix pred = predict(mlp, x);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const double d = pred.values()[i] - y.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.values().size());
}

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// Relative error with a floor on the denominator so that coordinates whose
// true gradient is below 1e-5 are judged on absolute error instead (loss roundoff
// over the stencil is ~1e-11).
inline double rel_err(double a, double b, double floor = 1e-5) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

// Every parameter (weights, biases, log-sharpness of trainable layers)
// against a five-point central difference of the MSE loss with
// h = 1e-5 * max(1, |theta|). The plain two-point stencil has truncation
// error ~h² f''' / 6, which for frequency 30 and sharpness 8 is ~1e-5
// relative.
inline GradCheckReport gradient_check(Mlp mlp, const Matrix& x, const Matrix& y) {
  const auto fwd = forward(mlp, x);
  const auto loss = mse_loss(fwd.output, y);
  const Gradients g = backward(mlp, fwd.trace, loss.d_pred);

  GradCheckReport report;
  auto probe = [&](double& theta, double analytic, const std::string& name) {
    const double saved = theta;
    const double h = 1e-5 * std::max(1.0, std::fabs(saved));
    auto at = [&](double offset) {
      theta = saved + offset;
      return loss_of(mlp, x, y);
    };
    const double d1 = at(h) - at(-h);
    const double d2 = at(2.0 * h) - at(-2.0 * h);
    theta = saved;
    const double numeric = (8.0 * d1 - d2) / (12.0 * h);
    const double e = rel_err(analytic, numeric);
    ++report.checked;
    if (e > report.max_rel_err) {
      report.max_rel_err = e;
      report.worst = name + " analytic=" + std::to_string(analytic) + " numeric=" + std::to_string(numeric);
    }
  };

  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    for (std::size_t i = 0; i < mlp.weights[l].values().size(); ++i) {
      probe(mlp.weights[l].values()[i], g.d_weights[l].values()[i],
            "W" + std::to_string(l) + "[" + std::to_string(i) + "]");
    }
    for (std::size_t i = 0; i < mlp.biases[l].values().size(); ++i) {
      probe(mlp.biases[l].values()[i], g.d_biases[l].values()[i],
            "b" + std::to_string(l) + "[" + std::to_string(i) + "]");
    }
  }
  for (std::size_t l = 0; l < mlp.log_sharp.size(); ++l) {
    if (!is_trainable_hosc(mlp.spec.activation_per_layer[l])) continue;
    probe(mlp.log_sharp[l], g.d_log_sharp[l], "log_sharp" + std::to_string(l));
  }
  return report;
}

// Depth-2 width-8 net on 2D inputs with random (nonzero) biases so that no
// ReLU unit sits exactly at its kink, plus a random batch and targets.
struct GradCheckCase {
  Mlp mlp;
  Matrix x;
  Matrix y;
};

inline GradCheckCase make_gradcheck_case(std::vector<Activation> acts, std::uint64_t seed,
                                         InitScheme init = InitScheme::SirenUniform) {
  MlpSpec spec;
  spec.in_dim = 2;
  spec.out_dim = 1;
  spec.hidden_width = 8;
  spec.hidden_layers = acts.size();
  spec.activation_per_layer = std::move(acts);
  spec.init_scheme = init;
  spec.seed = seed;
  GradCheckCase c{init_mlp(spec), Matrix(), Matrix()};
  Rng rng(seed, 99);
  for (auto& b : c.mlp.biases) b = rng_uniform(rng, -0.5, 0.5, b.rows(), b.cols());
  c.x = rng_uniform(rng, -1.0, 1.0, 16, 2);
  c.y = rng_uniform(rng, -1.0, 1.0, 16, 1);
  return c;
}

inline double segment_distance_bruteforce(std::array<double, 2> p, std::array<double, 2> a,
                                          std::array<double, 2> b, std::size_t samples) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples);
    const double qx = a[0] + t * (b[0] - a[0]);
    const double qy = a[1] + t * (b[1] - a[1]);
    best = std::min(best, std::hypot(p[0] - qx, p[1] - qy));
  }
  return best;
}

// Unique scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hosc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hosc::testing
