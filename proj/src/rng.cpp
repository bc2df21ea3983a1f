#include "hosc/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hosc/error.hpp"

namespace hosc {

namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix(mix(seed + kGolden) ^ (stream * 0xd1b54a32d192ed03ULL))) {}

Rng Rng::split(std::uint64_t stream) const { return Rng(seed_, stream); }

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double Rng::next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw ArgumentError("Rng::uniform: require lo < hi, got lo=" + std::to_string(lo) +
                        " hi=" + std::to_string(hi));
  }
  double v = lo + (hi - lo) * next_double();
  // rounding in lo + (hi-lo)*u can land on hi
  return v < hi ? v : std::nextafter(hi, lo);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("Rng::below: bound must be positive");
  // rejection sampling keeps the draw unbiased
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double Rng::normal() {
  // Box-Muller; u1 in (0, 1]
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix rng_uniform(Rng& rng, double lo, double hi, std::size_t rows, std::size_t cols) {
  if (!(lo < hi)) {
    throw ArgumentError("rng_uniform: require lo < hi, got lo=" + std::to_string(lo) +
                        " hi=" + std::to_string(hi));
  }
  Matrix out(rows, cols);
  for (double& v : out.values()) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace hosc
