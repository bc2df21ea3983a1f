#pragma once

#include <span>
#include <string>
#include <variant>

namespace hosc {

// Scalar definitions. All of them throw ArgumentError on a non-positive
// sharpness or frequency.

/// tanh(sharp * sin x)
double hosc_forward(double x, double sharp);
/// d/dx of hosc_forward: sharp * cos x * (1 - hosc²)
double hosc_dx(double x, double sharp);
/// d/dsharp of hosc_forward: sin x * (1 - hosc²)
double hosc_dsharp(double x, double sharp);

double sine_forward(double x, double freq);
double sine_dx(double x, double freq);

double relu_forward(double x);
/// Subgradient at 0 is 0.
double relu_dx(double x);

/// sign(sin x), the infinite-sharpness limit of HOSC.
double square_wave(double x);

// Activation kinds. Every periodic kind applies its frequency to the
// pre-activation: act(freq * z).

struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};

struct Sine {
  double freq = 1.0;
  friend bool operator==(const Sine&, const Sine&) = default;
};

struct Hosc {
  double sharp = 1.0;
  bool trainable = false;
  double freq = 1.0;
  friend bool operator==(const Hosc&, const Hosc&) = default;
};

/// Evaluation only; has no derivative.
struct SquareWave {
  double freq = 1.0;
  friend bool operator==(const SquareWave&, const SquareWave&) = default;
};

using Activation = std::variant<Relu, Sine, Hosc, SquareWave>;

/// Throws ArgumentError when a frequency or sharpness is not positive and finite.
void validate(const Activation& act);

/// Frequency multiplier of the activation, 1 for ReLU.
double frequency_of(const Activation& act);
bool is_trainable_hosc(const Activation& act);
std::string describe(const Activation& act);

/// Pointwise value of act at pre-activation z, with `sharp` overriding the
/// stored HOSC sharpness (the network keeps live sharpness separately).
double activate(const Activation& act, double z, double sharp);
/// d act / dz at z. Throws ContractError for SquareWave.
double activate_dz(const Activation& act, double z, double sharp);

namespace kernels {

// Batched versions used by the network. They compute the same functions as
// the scalar API, through loops the compiler can vectorize.

void forward(const Activation& act, double sharp, std::span<const double> pre,
             std::span<double> post);

/// Writes d_pre = d_post * act'(pre) and returns
/// sum(d_post * d act / d sharp) for HOSC, 0 otherwise.
double backward(const Activation& act, double sharp, std::span<const double> pre,
                std::span<const double> post, std::span<const double> d_post,
                std::span<double> d_pre);

}  // namespace kernels

}  // namespace hosc
