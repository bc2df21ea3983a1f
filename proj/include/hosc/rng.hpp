#pragma once

#include <cstddef>
#include <cstdint>

#include "hosc/matrix.hpp"

namespace hosc {

/// Counter-based generator: draw i of stream (seed, stream) is a pure
/// function of (seed, stream, i), so streams are independent and
/// reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for a named sub-stream of the same seed.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double next_double();
  /// Uniform in [lo, hi). Throws ArgumentError unless lo < hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

Matrix rng_uniform(Rng& rng, double lo, double hi, std::size_t rows, std::size_t cols);

/// Stream ids used across the project so each consumer draws independently.
namespace streams {
inline constexpr std::uint64_t kWeights = 1;
inline constexpr std::uint64_t kDataset = 2;
inline constexpr std::uint64_t kShuffle = 3;
}  // namespace streams

}  // namespace hosc
