#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hosc/activation.hpp"
#include "hosc/matrix.hpp"

namespace hosc {

enum class InitScheme : std::uint8_t {
  SirenUniform = 0,
  StandardUniform = 1,
};

/// Architecture: in_dim -> hidden_width (x hidden_layers, each followed by
/// its activation) -> out_dim through a final affine layer.
struct MlpSpec {
  std::size_t in_dim = 2;
  std::size_t out_dim = 1;
  std::size_t hidden_width = 256;
  std::size_t hidden_layers = 4;
  std::vector<Activation> activation_per_layer;
  InitScheme init_scheme = InitScheme::SirenUniform;
  std::uint64_t seed = 0;

  /// Throws ArgumentError on an inconsistent spec.
  void validate() const;
  std::size_t layer_count() const noexcept { return hidden_layers + 1; }
  std::size_t fan_in(std::size_t layer) const noexcept;
  std::size_t fan_out(std::size_t layer) const noexcept;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// HOSC layers with per-layer sharpness taken from `sharpness` (one entry
/// per hidden layer). The first layer uses `first_freq`, the rest `freq`.
std::vector<Activation> hosc_layers(const std::vector<double>& sharpness, double first_freq,
                                    double freq, bool trainable);
std::vector<Activation> sine_layers(std::size_t count, double first_freq, double freq);
std::vector<Activation> relu_layers(std::size_t count);

struct Mlp {
  MlpSpec spec;
  /// weights[l] has shape (fan_in_l, fan_out_l); the last one is the output layer.
  std::vector<Matrix> weights;
  /// biases[l] is a 1 x fan_out_l row.
  std::vector<Matrix> biases;
  /// One entry per hidden layer. Only trainable HOSC layers read or update it.
  std::vector<double> log_sharp;

  /// Live sharpness of hidden layer l: exp(log_sharp) for trainable HOSC,
  /// the fixed value otherwise (1 for non-HOSC layers).
  double sharpness(std::size_t layer) const;
  std::vector<double> sharpness_values() const;

  std::size_t parameter_count() const noexcept;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

Mlp init_mlp(const MlpSpec& spec);

struct ForwardTrace {
  Matrix input;
  /// Per hidden layer.
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

struct Gradients {
  std::vector<Matrix> d_weights;
  std::vector<Matrix> d_biases;
  std::vector<double> d_log_sharp;
};

Gradients zero_gradients(const Mlp& mlp);

struct ForwardResult {
  Matrix output;
  ForwardTrace trace;
};

/// Batched forward pass, caching every layer. Throws DimensionError on a
/// coordinate-width mismatch and NumericError naming the first layer that
/// produced a non-finite value.
ForwardResult forward(const Mlp& mlp, const Matrix& coords);
/// Forward pass that keeps no trace.
Matrix predict(const Mlp& mlp, const Matrix& coords);

/// Reverse-mode gradients of a scalar loss given d loss / d output.
Gradients backward(const Mlp& mlp, const ForwardTrace& trace, const Matrix& d_output);

// Checkpoint container, little-endian:
//   magic "HOSCMLP\0" (8 bytes), u32 version = 1,
//   u64 in_dim, u64 out_dim, u64 hidden_width, u64 hidden_layers,
//   u8 init_scheme, u64 seed,
//   hidden_layers x { u8 kind (0 relu, 1 sine, 2 hosc, 3 square),
//                     f64 freq, f64 sharp, u8 trainable },
//   layer_count x { u64 rows, u64 cols, f64[rows*cols] weights (row-major),
//                   u64 bias_cols, f64[bias_cols] bias },
//   u64 n, f64[n] log_sharp.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Mlp& mlp, std::ostream& out);
Mlp load_checkpoint(std::istream& in);
void save_checkpoint(const Mlp& mlp, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace hosc
