#include "hosc/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hosc/error.hpp"

namespace hosc {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << v;
    throw ArgumentError(os.str());
  }
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

double hosc_forward(double x, double sharp) {
  require_positive(sharp, "hosc sharpness");
  return std::tanh(sharp * std::sin(x));
}

double hosc_dx(double x, double sharp) {
  const double h = hosc_forward(x, sharp);
  return sharp * std::cos(x) * (1.0 - h * h);
}

double hosc_dsharp(double x, double sharp) {
  const double h = hosc_forward(x, sharp);
  return std::sin(x) * (1.0 - h * h);
}

double sine_forward(double x, double freq) {
  require_positive(freq, "sine frequency");
  return std::sin(freq * x);
}

double sine_dx(double x, double freq) {
  require_positive(freq, "sine frequency");
  return freq * std::cos(freq * x);
}

double relu_forward(double x) { return x > 0.0 ? x : 0.0; }

double relu_dx(double x) { return x > 0.0 ? 1.0 : 0.0; }

double square_wave(double x) {
  const double s = std::sin(x);
  // sin(k*pi) is ~1e-16 in floating point, not 0
  if (std::abs(s) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
    return 0.0;
  return s > 0.0 ? 1.0 : -1.0;
}

void validate(const Activation& act) {
  std::visit(overloaded{
                 [](const Relu&) {},
                 [](const Sine& s) { require_positive(s.freq, "sine frequency"); },
                 [](const Hosc& h) {
                   require_positive(h.sharp, "hosc sharpness");
                   require_positive(h.freq, "hosc frequency");
                 },
                 [](const SquareWave& s) { require_positive(s.freq, "square-wave frequency"); },
             },
             act);
}

double frequency_of(const Activation& act) {
  return std::visit(overloaded{
                        [](const Relu&) { return 1.0; },
                        [](const Sine& s) { return s.freq; },
                        [](const Hosc& h) { return h.freq; },
                        [](const SquareWave& s) { return s.freq; },
                    },
                    act);
}

bool is_trainable_hosc(const Activation& act) {
  const auto* h = std::get_if<Hosc>(&act);
  return h != nullptr && h->trainable;
}

std::string describe(const Activation& act) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Relu&) { os << "relu"; },
                 [&](const Sine& s) { os << "sine(freq=" << s.freq << ")"; },
                 [&](const Hosc& h) {
                   os << (h.trainable ? "adahosc" : "hosc") << "(sharp=" << h.sharp
                      << ", freq=" << h.freq << ")";
                 },
                 [&](const SquareWave& s) { os << "square(freq=" << s.freq << ")"; },
             },
             act);
  return os.str();
}

double activate(const Activation& act, double z, double sharp) {
  return std::visit(overloaded{
                        [&](const Relu&) { return relu_forward(z); },
                        [&](const Sine& s) { return sine_forward(z, s.freq); },
                        [&](const Hosc& h) { return hosc_forward(h.freq * z, sharp); },
                        [&](const SquareWave& s) { return square_wave(s.freq * z); },
                    },
                    act);
}

double activate_dz(const Activation& act, double z, double sharp) {
  return std::visit(overloaded{
                        [&](const Relu&) { return relu_dx(z); },
                        [&](const Sine& s) { return sine_dx(z, s.freq); },
                        [&](const Hosc& h) { return h.freq * hosc_dx(h.freq * z, sharp); },
                        [&](const SquareWave&) -> double {
                          throw ContractError("square wave has no derivative");
                        },
                    },
                    act);
}

}  // namespace hosc
