#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "hosc/matrix.hpp"
#include "hosc/netpbm.hpp"
#include "hosc/rng.hpp"

namespace hosc {

enum class SignalKind { Image, Sdf2d, Sdf3d, Signal1d };

const char* to_string(SignalKind kind);

/// Training pairs (coordinate row, target row) plus the domain they live in.
struct SignalDataset {
  SignalKind kind = SignalKind::Image;
  Matrix coords;
  Matrix targets;
  std::vector<double> domain_lo;
  std::vector<double> domain_hi;
  /// Raster size for data sampled on a pixel-center grid, 0 otherwise.
  std::size_t grid_width = 0;
  std::size_t grid_height = 0;

  std::size_t size() const noexcept { return coords.rows(); }
  std::size_t in_dim() const noexcept { return coords.cols(); }
  std::size_t out_dim() const noexcept { return targets.cols(); }

  friend bool operator==(const SignalDataset&, const SignalDataset&) = default;
};

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Pixel centers of a width x height raster mapped to [-1, 1]², row-major
/// (row y, column x); column 0 holds x, column 1 holds y.
Matrix image_grid(std::size_t width, std::size_t height);

SignalDataset image_dataset(const Image& image);

struct SquarePatches {
  Image image;
  /// Top-left pixel (x, y) of every patch, in draw order.
  std::vector<std::array<std::size_t, 2>> corners;
  std::size_t patch_size = 0;
};

/// Black square image with n_patches white patch_size squares placed
/// uniformly at random, fully inside, overlaps allowed.
SquarePatches gen_square_patches(Rng& rng, std::size_t img_size, std::size_t n_patches,
                                 std::size_t patch_size);

// Exact signed distances, negative inside.
double sdf_circle(Vec2 p, double radius);
double sdf_sphere(Vec3 p, double radius);
double sdf_box(Vec3 p, Vec3 half_extents);
/// Torus around the y axis: ring radius `major`, tube radius `minor`.
double sdf_torus(Vec3 p, double major, double minor);

struct StarShape {
  std::size_t points = 5;
  double outer_radius = 0.8;
  double inner_radius = 0.4;

  void validate() const;
  /// 2 * points vertices, counter-clockwise from the top, alternating outer/inner.
  std::vector<Vec2> vertices() const;
  friend bool operator==(const StarShape&, const StarShape&) = default;
};

double sdf_star(Vec2 p, const StarShape& shape);
/// Even-odd containment test against an arbitrary closed polygon.
bool point_in_polygon(Vec2 p, const std::vector<Vec2>& polygon);

/// Samples of sdf_star on a width x height pixel-center grid over [-1, 1]².
SignalDataset star_dataset(const StarShape& shape, std::size_t width, std::size_t height);

enum class Shape3d { Sphere, Box, Torus, SphereMinusBox };

Shape3d parse_shape3d(const std::string& name);
const char* to_string(Shape3d shape);

/// Analytic 3D shapes with fixed placement inside [-1, 1]³. SphereMinusBox
/// is the CSG difference max(sphere, -box): exact sign, distance is a bound
/// near the carved edges.
double sdf_shape3d(Shape3d shape, Vec3 p);

/// Half uniform samples in [-1, 1]³, half surface points plus isotropic
/// Gaussian noise of std `noise`; near-surface draws landing outside the
/// cube are redrawn.
SignalDataset gen_sdf3d_samples(Rng& rng, Shape3d shape, std::size_t n_samples,
                                double noise = 0.05);

struct SineMode {
  double amplitude = 1.0;
  double freq = 1.0;
  double phase = 0.0;
};

/// sum_j a_j sin(2 pi f_j x + phi_j) sampled at n_samples evenly spaced points of [-1, 1].
SignalDataset signal1d_from_modes(const std::vector<SineMode>& modes, std::size_t n_samples);

/// Random band-limited signal: a ~ U[-1, 1], f ~ U[1, max_freq], phi ~ U[0, 2 pi).
SignalDataset gen_signal1d(Rng& rng, std::size_t n_modes, double max_freq, std::size_t n_samples,
                           std::vector<SineMode>* modes_out = nullptr);

/// Whitespace-separated rows "x y z sdf" (3D) or "x y v" (2D). Blank lines
/// and lines starting with '#' are skipped.
SignalDataset load_point_samples(const std::filesystem::path& path);
void save_point_samples(const SignalDataset& dataset, const std::filesystem::path& path);

/// Dataset targets on its pixel grid as an image (requires grid_width/height).
Image dataset_image(const SignalDataset& dataset);

}  // namespace hosc
