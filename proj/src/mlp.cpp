#include "hosc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hosc/error.hpp"
#include "hosc/rng.hpp"

namespace hosc {

void MlpSpec::validate() const {
  if (in_dim == 0 || out_dim == 0) throw ArgumentError("MlpSpec: in_dim and out_dim must be >= 1");
  if (hidden_width == 0) throw ArgumentError("MlpSpec: hidden_width must be >= 1");
  if (hidden_layers == 0) throw ArgumentError("MlpSpec: hidden_layers must be >= 1");
  if (activation_per_layer.size() != hidden_layers) {
    throw ArgumentError("MlpSpec: " + std::to_string(activation_per_layer.size()) +
                        " activations for " + std::to_string(hidden_layers) + " hidden layers");
  }
  for (const auto& act : activation_per_layer) hosc::validate(act);
}

std::size_t MlpSpec::fan_in(std::size_t layer) const noexcept {
  return layer == 0 ? in_dim : hidden_width;
}

std::size_t MlpSpec::fan_out(std::size_t layer) const noexcept {
  return layer == hidden_layers ? out_dim : hidden_width;
}

std::vector<Activation> hosc_layers(const std::vector<double>& sharpness, double first_freq,
                                    double freq, bool trainable) {
  std::vector<Activation> out;
  out.reserve(sharpness.size());
  for (std::size_t l = 0; l < sharpness.size(); ++l) {
    out.emplace_back(Hosc{sharpness[l], trainable, l == 0 ? first_freq : freq});
  }
  return out;
}

std::vector<Activation> sine_layers(std::size_t count, double first_freq, double freq) {
  std::vector<Activation> out;
  out.reserve(count);
  for (std::size_t l = 0; l < count; ++l) out.emplace_back(Sine{l == 0 ? first_freq : freq});
  return out;
}

std::vector<Activation> relu_layers(std::size_t count) {
  return std::vector<Activation>(count, Relu{});
}

double Mlp::sharpness(std::size_t layer) const {
  const auto& act = spec.activation_per_layer.at(layer);
  if (const auto* h = std::get_if<Hosc>(&act)) {
    return h->trainable ? std::exp(log_sharp.at(layer)) : h->sharp;
  }
  return 1.0;
}

std::vector<double> Mlp::sharpness_values() const {
  std::vector<double> out(spec.hidden_layers);
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = sharpness(l);
  return out;
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  for (std::size_t l = 0; l < spec.activation_per_layer.size(); ++l) {
    if (is_trainable_hosc(spec.activation_per_layer[l])) ++n;
  }
  return n;
}

Mlp init_mlp(const MlpSpec& spec) {
  spec.validate();
  Mlp mlp;
  mlp.spec = spec;
  Rng rng = Rng(spec.seed).split(streams::kWeights);

  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const auto fan_in = static_cast<double>(spec.fan_in(l));
    double bound = 0.0;
    if (spec.init_scheme == InitScheme::StandardUniform) {
      bound = std::sqrt(1.0 / fan_in);
    } else if (l == 0) {
      bound = 1.0 / fan_in;
    } else {
      const double omega =
          l < spec.hidden_layers ? frequency_of(spec.activation_per_layer[l]) : 1.0;
      bound = std::sqrt(6.0 / fan_in) / omega;
    }
    mlp.weights.push_back(rng_uniform(rng, -bound, bound, spec.fan_in(l), spec.fan_out(l)));
    mlp.biases.push_back(Matrix::zeros(1, spec.fan_out(l)));
  }

  mlp.log_sharp.assign(spec.hidden_layers, 0.0);
  for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
    if (const auto* h = std::get_if<Hosc>(&spec.activation_per_layer[l])) {
      mlp.log_sharp[l] = std::log(h->sharp);
    }
  }
  return mlp;
}

namespace {

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix out = matmul(x, w);
  auto bias = b.values();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
  return out;
}

void check_finite(const Matrix& m, std::size_t layer, const MlpSpec& spec) {
  if (!m.all_finite()) {
    const std::string name =
        layer == spec.hidden_layers ? "output layer" : "hidden layer " + std::to_string(layer);
    throw NumericError("forward: non-finite value in " + name);
  }
}

void check_input(const Mlp& mlp, const Matrix& coords) {
  if (coords.cols() != mlp.spec.in_dim) {
    throw DimensionError("forward: coordinates " + coords.shape_string() + " but network expects " +
                         std::to_string(mlp.spec.in_dim) + " input columns");
  }
}

}  // namespace

ForwardResult forward(const Mlp& mlp, const Matrix& coords) {
  check_input(mlp, coords);
  const auto& spec = mlp.spec;
  ForwardResult result;
  result.trace.input = coords;
  result.trace.pre.reserve(spec.hidden_layers);
  result.trace.post.reserve(spec.hidden_layers);

  const Matrix* h = &coords;
  for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
    Matrix pre = affine(*h, mlp.weights[l], mlp.biases[l]);
    // checked before the activation: relu would turn NaN into 0
    check_finite(pre, l, spec);
    Matrix post(pre.rows(), pre.cols());
    kernels::forward(spec.activation_per_layer[l], mlp.sharpness(l), pre.values(), post.values());
    result.trace.pre.push_back(std::move(pre));
    result.trace.post.push_back(std::move(post));
    h = &result.trace.post.back();
  }
  result.output = affine(*h, mlp.weights.back(), mlp.biases.back());
  check_finite(result.output, spec.hidden_layers, spec);
  return result;
}

Matrix predict(const Mlp& mlp, const Matrix& coords) {
  check_input(mlp, coords);
  const auto& spec = mlp.spec;
  Matrix h = coords;
  for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
    Matrix pre = affine(h, mlp.weights[l], mlp.biases[l]);
    check_finite(pre, l, spec);
    h = Matrix(pre.rows(), pre.cols());
    kernels::forward(spec.activation_per_layer[l], mlp.sharpness(l), pre.values(), h.values());
  }
  Matrix out = affine(h, mlp.weights.back(), mlp.biases.back());
  check_finite(out, spec.hidden_layers, spec);
  return out;
}

Gradients zero_gradients(const Mlp& mlp) {
  Gradients g;
  for (const auto& w : mlp.weights) g.d_weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : mlp.biases) g.d_biases.emplace_back(b.rows(), b.cols());
  g.d_log_sharp.assign(mlp.log_sharp.size(), 0.0);
  return g;
}

Gradients backward(const Mlp& mlp, const ForwardTrace& trace, const Matrix& d_output) {
  const auto& spec = mlp.spec;
  const std::size_t batch = trace.input.rows();
  const bool consistent =
      trace.input.cols() == spec.in_dim && trace.pre.size() == spec.hidden_layers &&
      trace.post.size() == spec.hidden_layers &&
      std::all_of(trace.pre.begin(), trace.pre.end(),
                  [&](const Matrix& m) { return m.rows() == batch && m.cols() == spec.hidden_width; }) &&
      std::all_of(trace.post.begin(), trace.post.end(),
                  [&](const Matrix& m) { return m.rows() == batch && m.cols() == spec.hidden_width; });
  if (!consistent) throw ContractError("backward: trace does not match the network");
  if (d_output.rows() != batch || d_output.cols() != spec.out_dim) {
    throw ContractError("backward: d_output " + d_output.shape_string() + " does not match batch " +
                        std::to_string(batch) + " x " + std::to_string(spec.out_dim));
  }

  Gradients grads;
  grads.d_weights.resize(spec.layer_count());
  grads.d_biases.resize(spec.layer_count());
  grads.d_log_sharp.assign(spec.hidden_layers, 0.0);

  Matrix delta = d_output;
  for (std::size_t l = spec.layer_count(); l-- > 0;) {
    const Matrix& input = l == 0 ? trace.input : trace.post[l - 1];
    grads.d_weights[l] = matmul_tn(input, delta);
    grads.d_biases[l] = column_sums(delta);
    if (l == 0) break;

    const std::size_t hidden = l - 1;
    const auto& act = spec.activation_per_layer[hidden];
    const double sharp = mlp.sharpness(hidden);
    Matrix d_post = matmul_nt(delta, mlp.weights[l]);
    Matrix d_pre(d_post.rows(), d_post.cols());
    const double d_sharp = kernels::backward(act, sharp, trace.pre[hidden].values(),
                                             trace.post[hidden].values(), d_post.values(),
                                             d_pre.values());
    // chain rule through sharp = exp(log_sharp)
    if (is_trainable_hosc(act)) grads.d_log_sharp[hidden] = sharp * d_sharp;
    delta = std::move(d_pre);
  }
  return grads;
}

}  // namespace hosc
