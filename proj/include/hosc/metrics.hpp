#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hosc/matrix.hpp"
#include "hosc/mlp.hpp"
#include "hosc/netpbm.hpp"

namespace hosc {

/// PSNR reported for an exact match.
inline constexpr double kPsnrCap = 200.0;

/// 10 log10(max² / MSE) in dB, capped at kPsnrCap.
double psnr(const Matrix& pred, const Matrix& target, double max_value = 1.0);
double psnr_from_mse(double mse, double max_value = 1.0);

/// Scalar field sampled at the vertices of a uniform grid over [-1, 1]^dims.
/// Vertex i along an axis sits at -1 + 2 i / (resolution - 1); the first
/// axis varies fastest.
struct GridField {
  std::size_t dims = 2;
  std::size_t resolution = 2;
  std::vector<double> values;

  std::size_t point_count() const noexcept;
  friend bool operator==(const GridField&, const GridField&) = default;
};

/// Vertex coordinates of the grid, one row per point in GridField order.
Matrix grid_coordinates(std::size_t resolution, std::size_t dims);

/// Samples an analytic field on the grid.
GridField sample_grid(const std::function<double(std::span<const double>)>& f,
                      std::size_t resolution, std::size_t dims);

/// Evaluates the (single-output) network on the grid in fixed-size
/// chunks. `threads` > 1 shards the chunks across threads; the result
/// does not depend on the thread count.
GridField eval_grid(const Mlp& mlp, std::size_t resolution, std::size_t dims,
                    std::size_t threads = 1);

/// |{a < 0} ∩ {b < 0}| / |{a < 0} ∪ {b < 0}|, 1 for an empty union.
double iou_occupancy(const GridField& a, const GridField& b);
double iou_occupancy(std::span<const double> a, std::span<const double> b);

/// |pred - target| divided by its maximum (all zeros when identical), as a
/// single-channel image of the given size (channels are averaged).
Image residual_image(const Matrix& pred, const Matrix& target, std::size_t width,
                     std::size_t height);

struct MetricsRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> psnr;
  double lr = 0.0;
  std::vector<double> sharpness;
};

/// Per-epoch training trace.
class MetricsLog {
 public:
  explicit MetricsLog(std::size_t hidden_layers = 0) : hidden_layers_(hidden_layers) {}

  /// Throws ContractError unless epochs strictly increase and values are finite.
  void append(MetricsRecord record);

  const std::vector<MetricsRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t hidden_layers() const noexcept { return hidden_layers_; }

  /// Columns: epoch,loss,psnr,lr,sharp_0..sharp_{L-1}. Empty psnr cells
  /// when not applicable. Numbers use 17 significant digits.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::size_t hidden_layers_;
  std::vector<MetricsRecord> records_;
};

}  // namespace hosc
