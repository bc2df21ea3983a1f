#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hosc/activation.hpp"
#include "hosc/error.hpp"
#include "hosc/rng.hpp"

using namespace hosc;

namespace {

constexpr double kPi = std::numbers::pi;

double central(auto f, double x, double h) { return (f(x + h) - f(x - h)) / (2.0 * h); }

}  // namespace

TEST(Hosc, KnownValues) {
  EXPECT_EQ(hosc_forward(0.0, 8.0), 0.0);
  EXPECT_NEAR(hosc_forward(kPi / 2, 1.0), 0.76159415595576488812, 1e-15);
  EXPECT_NEAR(hosc_forward(kPi / 2, 8.0), 0.99999977492967588981, 1e-15);
  EXPECT_NEAR(hosc_forward(-kPi / 2, 2.0), -std::tanh(2.0), 1e-15);
  EXPECT_NEAR(hosc_dx(0.0, 3.0), 3.0, 1e-15);
  EXPECT_NEAR(hosc_dsharp(kPi / 2, 1.0), 1.0 - std::tanh(1.0) * std::tanh(1.0), 1e-15);
}

TEST(Hosc, RejectsNonPositiveSharpness) {
  EXPECT_THROW(hosc_forward(1.0, 0.0), ArgumentError);
  EXPECT_THROW(hosc_dx(1.0, -1.0), ArgumentError);
  EXPECT_THROW(hosc_dsharp(1.0, std::nan("")), ArgumentError);
}

TEST(Hosc, DerivativesMatchFiniteDifferencesAbsolute) {
  const double x = 1.0, s = 2.0, h = 1e-5;
  EXPECT_NEAR(hosc_dx(x, s), central([&](double v) { return hosc_forward(v, s); }, x, h), 1e-8);
  EXPECT_NEAR(hosc_dsharp(x, s), central([&](double v) { return hosc_forward(x, v); }, s, h), 1e-8);
}

TEST(HoscProperty, DerivativesMatchOverGrid) {
  for (double s : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    for (int i = 0; i <= 200; ++i) {
      const double x = -kPi + 2.0 * kPi * i / 200.0;
      const double h = 1e-6;
      const double fd_x = central([&](double v) { return hosc_forward(v, s); }, x, h);
      const double fd_s = central([&](double v) { return hosc_forward(x, v); }, s, h * s);
      const double ax = hosc_dx(x, s), as = hosc_dsharp(x, s);
      EXPECT_LE(std::fabs(ax - fd_x), 1e-6 * std::max(1e-3, std::fabs(fd_x))) << "x=" << x << " s=" << s;
      EXPECT_LE(std::fabs(as - fd_s), 1e-6 * std::max(1e-3, std::fabs(fd_s))) << "x=" << x << " s=" << s;
    }
  }
}

TEST(HoscProperty, PeriodicOddBounded) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-20.0, 20.0);
    const double s = rng.uniform(0.1, 50.0);
    const double y = hosc_forward(x, s);
    EXPECT_NEAR(hosc_forward(x + 2.0 * kPi, s), y, 1e-12);
    EXPECT_EQ(hosc_forward(-x, s), -y);
    // tanh rounds to exactly 1 in double once its argument passes ~19
    EXPECT_LE(std::fabs(y), 1.0);
    if (s * std::fabs(std::sin(x)) < 18.0) EXPECT_LT(std::fabs(y), 1.0);
  }
}

TEST(HoscProperty, SquareWaveLimit) {
  double worst = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = -10.0 + 20.0 * i / 100000.0;
    if (std::fabs(std::sin(x)) < 0.1) continue;
    worst = std::max(worst, std::fabs(hosc_forward(x, 100.0) - square_wave(x)));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(HoscProperty, MonotoneInSharpness) {
  for (double x : {0.3, 1.0, 2.5, -0.7, -2.0}) {
    double prev = std::fabs(hosc_forward(x, 0.5));
    for (double s : {1.0, 2.0, 4.0, 8.0}) {
      const double cur = std::fabs(hosc_forward(x, s));
      EXPECT_GT(cur, prev);
      prev = cur;
    }
  }
}

TEST(SquareWave, ValuesAndZeros) {
  EXPECT_EQ(square_wave(1.0), 1.0);
  EXPECT_EQ(square_wave(-1.0), -1.0);
  EXPECT_EQ(square_wave(0.0), 0.0);
  EXPECT_EQ(square_wave(kPi), 0.0);
  EXPECT_EQ(square_wave(4.0), -1.0);
}

TEST(Sine, ValuesAndDerivative) {
  EXPECT_NEAR(sine_forward(0.1, 30.0), std::sin(3.0), 1e-15);
  EXPECT_NEAR(sine_dx(0.1, 30.0), 30.0 * std::cos(3.0), 1e-13);
  EXPECT_THROW(sine_forward(0.1, 0.0), ArgumentError);
}

TEST(Relu, ValuesAndSubgradient) {
  EXPECT_EQ(relu_forward(-1.0), 0.0);
  EXPECT_EQ(relu_forward(2.0), 2.0);
  EXPECT_EQ(relu_dx(0.0), 0.0);
  EXPECT_EQ(relu_dx(0.5), 1.0);
}

TEST(Activation, VariantDispatchAppliesFrequency) {
  const Activation h = Hosc{4.0, false, 30.0};
  EXPECT_NEAR(activate(h, 0.05, 4.0), hosc_forward(1.5, 4.0), 1e-15);
  EXPECT_NEAR(activate_dz(h, 0.05, 4.0), 30.0 * hosc_dx(1.5, 4.0), 1e-12);
  const Activation s = Sine{30.0};
  EXPECT_NEAR(activate(s, 0.05, 1.0), std::sin(1.5), 1e-15);
  EXPECT_THROW(activate_dz(SquareWave{}, 1.0, 1.0), ContractError);
  EXPECT_THROW(validate(Activation{Hosc{-1.0}}), ArgumentError);
  EXPECT_THROW(validate(Activation{Sine{0.0}}), ArgumentError);
  EXPECT_EQ(frequency_of(Relu{}), 1.0);
  EXPECT_TRUE(is_trainable_hosc(Hosc{8.0, true}));
  EXPECT_FALSE(is_trainable_hosc(Sine{}));
}

TEST(ActivationKernels, MatchScalarApi) {
  Rng rng(5);
  const std::size_t n = 1037;  // not a multiple of any vector width
  std::vector<double> z(n), y(n), g(n), dz(n);
  for (auto& v : z) v = rng.uniform(-3.0, 3.0);
  for (auto& v : g) v = rng.uniform(-1.0, 1.0);
  const std::vector<Activation> acts{Relu{}, Sine{30.0}, Hosc{8.0, false, 1.0}, Hosc{2.0, true, 30.0}};
  for (const auto& act : acts) {
    const double sharp = std::holds_alternative<Hosc>(act) ? std::get<Hosc>(act).sharp : 1.0;
    kernels::forward(act, sharp, z, y);
    const double d_sharp = kernels::backward(act, sharp, z, y, g, dz);
    double expect_sharp = 0.0;
    const double w = frequency_of(act);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(y[i], activate(act, z[i], sharp), 1e-14) << describe(act);
      EXPECT_NEAR(dz[i], g[i] * activate_dz(act, z[i], sharp), 1e-11) << describe(act);
      if (std::holds_alternative<Hosc>(act)) expect_sharp += g[i] * hosc_dsharp(w * z[i], sharp);
    }
    EXPECT_NEAR(d_sharp, expect_sharp, 1e-10) << describe(act);
  }
}

TEST(ActivationKernels, LengthMismatch) {
  std::vector<double> a(3), b(4);
  EXPECT_THROW(kernels::forward(Relu{}, 1.0, a, b), DimensionError);
}

TEST(Hosc, DerivativeSpecialPoints) {
  EXPECT_NEAR(hosc_dx(kPi / 2, 5.0), 0.0, 1e-15);
  EXPECT_EQ(hosc_dsharp(0.0, 5.0), 0.0);
  EXPECT_NEAR(hosc_dsharp(kPi / 2, 1.0), 0.41997434161402606, 1e-15);
  const double h = 1e-5;
  EXPECT_NEAR(hosc_dsharp(1.0, 3.0), central([](double v) { return hosc_forward(1.0, v); }, 3.0, h), 1e-8);
}

TEST(Sine, SpecialPoints) {
  EXPECT_EQ(sine_forward(0.0, 30.0), 0.0);
  EXPECT_EQ(sine_dx(0.0, 30.0), 30.0);
  EXPECT_NEAR(sine_forward(kPi / 60, 30.0), 1.0, 1e-15);
  EXPECT_EQ(relu_forward(-3.0), 0.0);
  EXPECT_EQ(relu_forward(5.0), 5.0);
  EXPECT_EQ(square_wave(kPi / 2), 1.0);
  EXPECT_EQ(square_wave(3 * kPi / 2), -1.0);
}
