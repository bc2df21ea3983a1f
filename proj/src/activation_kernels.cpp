// Batched activation loops. When HOSC_USE_LIBMVEC is defined the libm
// entry points are redeclared with the glibc vector-ABI attribute so that
// GCC emits calls into libmvec for the `omp simd` loops below.

#include <cmath>

#include "hosc/activation.hpp"
#include "hosc/error.hpp"

#if defined(HOSC_USE_LIBMVEC)
extern "C" {
double sin(double) noexcept __attribute__((simd("notinbranch")));
double cos(double) noexcept __attribute__((simd("notinbranch")));
double expm1(double) noexcept __attribute__((simd("notinbranch")));
}
#endif

namespace hosc::kernels {

namespace {

// tanh through expm1 of a non-positive argument: no overflow, and the
// libmvec tanh falls back to a slow scalar path for |y| > ~1.
inline double tanh_via_expm1(double y) {
  const double e = ::expm1(-2.0 * std::fabs(y));
  return std::copysign(-e / (2.0 + e), y);
}

void require_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string("activation kernel: ") + what + " length mismatch");
}

}  // namespace

void forward(const Activation& act, double sharp, std::span<const double> pre,
             std::span<double> post) {
  require_sizes(pre.size(), post.size(), "pre/post");
  const std::size_t n = pre.size();
  const double* z = pre.data();
  double* y = post.data();

  if (std::holds_alternative<Relu>(act)) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] = z[i] > 0.0 ? z[i] : 0.0;
  } else if (const auto* s = std::get_if<Sine>(&act)) {
    const double w = s->freq;
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] = ::sin(w * z[i]);
  } else if (const auto* h = std::get_if<Hosc>(&act)) {
    const double w = h->freq;
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] = tanh_via_expm1(sharp * ::sin(w * z[i]));
  } else {
    for (std::size_t i = 0; i < n; ++i) y[i] = activate(act, z[i], sharp);
  }
}

double backward(const Activation& act, double sharp, std::span<const double> pre,
                std::span<const double> post, std::span<const double> d_post,
                std::span<double> d_pre) {
  require_sizes(pre.size(), post.size(), "pre/post");
  require_sizes(pre.size(), d_post.size(), "pre/d_post");
  require_sizes(pre.size(), d_pre.size(), "pre/d_pre");
  const std::size_t n = pre.size();
  const double* z = pre.data();
  const double* y = post.data();
  const double* g = d_post.data();
  double* out = d_pre.data();

  if (std::holds_alternative<Relu>(act)) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) out[i] = z[i] > 0.0 ? g[i] : 0.0;
    return 0.0;
  }
  if (const auto* s = std::get_if<Sine>(&act)) {
    const double w = s->freq;
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) out[i] = g[i] * w * ::cos(w * z[i]);
    return 0.0;
  }
  if (const auto* h = std::get_if<Hosc>(&act)) {
    const double w = h->freq;
    const double ws = w * sharp;
    // two passes: with sin and cos of the same argument in one loop GCC
    // fuses them into a scalar sincos call and gives up on vectorizing
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = g[i] * ws * ::cos(w * z[i]) * (1.0 - y[i] * y[i]);
    }
    double d_sharp = 0.0;
#pragma omp simd reduction(+ : d_sharp)
    for (std::size_t i = 0; i < n; ++i) {
      d_sharp += g[i] * ::sin(w * z[i]) * (1.0 - y[i] * y[i]);
    }
    return d_sharp;
  }
  throw ContractError("backward: " + describe(act) + " has no derivative");
}

}  // namespace hosc::kernels
