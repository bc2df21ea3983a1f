#include "hosc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include "hosc/error.hpp"

namespace hosc {

double psnr_from_mse(double mse, double max_value) {
  if (!(max_value > 0.0)) throw ArgumentError("psnr: max_value must be positive");
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_value * max_value / mse));
}

double psnr(const Matrix& pred, const Matrix& target, double max_value) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("psnr: shape mismatch " + pred.shape_string() + " vs " + target.shape_string());
  }
  if (pred.size() == 0) throw DimensionError("psnr: empty input");
  double sum = 0.0;
  auto p = pred.values();
  auto t = target.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = p[i] - t[i];
    sum += r * r;
  }
  return psnr_from_mse(sum / static_cast<double>(p.size()), max_value);
}

std::size_t GridField::point_count() const noexcept {
  std::size_t n = 1;
  for (std::size_t d = 0; d < dims; ++d) n *= resolution;
  return n;
}

Matrix grid_coordinates(std::size_t resolution, std::size_t dims) {
  if (resolution < 2) throw ArgumentError("grid resolution must be >= 2");
  if (dims < 1 || dims > 3) throw ArgumentError("grid dims must be 1, 2 or 3");
  GridField shape{dims, resolution, {}};
  const std::size_t n = shape.point_count();
  Matrix coords(n, dims);
  const double step = 2.0 / static_cast<double>(resolution - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    for (std::size_t d = 0; d < dims; ++d) {
      coords(i, d) = -1.0 + step * static_cast<double>(rest % resolution);
      rest /= resolution;
    }
  }
  return coords;
}

GridField sample_grid(const std::function<double(std::span<const double>)>& f,
                      std::size_t resolution, std::size_t dims) {
  const Matrix coords = grid_coordinates(resolution, dims);
  GridField field{dims, resolution, std::vector<double>(coords.rows())};
  for (std::size_t i = 0; i < coords.rows(); ++i) field.values[i] = f(coords.row(i));
  return field;
}

GridField eval_grid(const Mlp& mlp, std::size_t resolution, std::size_t dims, std::size_t threads) {
  if (mlp.spec.in_dim != dims) {
    throw DimensionError("eval_grid: network takes " + std::to_string(mlp.spec.in_dim) +
                         " inputs, grid has " + std::to_string(dims) + " dims");
  }
  if (mlp.spec.out_dim != 1) throw DimensionError("eval_grid: network must have a single output");
  const Matrix coords = grid_coordinates(resolution, dims);
  const std::size_t n = coords.rows();
  GridField field{dims, resolution, std::vector<double>(n)};

  // chunk boundaries are fixed, so every point sees the same computation
  // whatever the thread count
  constexpr std::size_t kChunk = 16384;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    const Matrix out = predict(mlp, slice_rows(coords, begin, end));
    std::copy(out.values().begin(), out.values().end(), field.values.begin() + static_cast<std::ptrdiff_t>(begin));
  };

  threads = std::max<std::size_t>(1, std::min(threads, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return field;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < chunks; c += threads) run_chunk(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return field;
}

double iou_occupancy(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("iou_occupancy: field sizes differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] < 0.0;
    const bool in_b = b[i] < 0.0;
    inter += (in_a && in_b) ? 1 : 0;
    uni += (in_a || in_b) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_occupancy(const GridField& a, const GridField& b) {
  if (a.dims != b.dims || a.resolution != b.resolution) {
    throw DimensionError("iou_occupancy: grids differ in shape");
  }
  return iou_occupancy(std::span<const double>(a.values), std::span<const double>(b.values));
}

Image residual_image(const Matrix& pred, const Matrix& target, std::size_t width, std::size_t height) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("residual_image: shape mismatch " + pred.shape_string() + " vs " +
                         target.shape_string());
  }
  if (pred.rows() != width * height) {
    throw DimensionError("residual_image: " + std::to_string(pred.rows()) + " rows for a " +
                         std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  Image out(width, height, 1);
  double peak = 0.0;
  for (std::size_t r = 0; r < pred.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < pred.cols(); ++c) sum += std::abs(pred(r, c) - target(r, c));
    out.values[r] = sum / static_cast<double>(pred.cols());
    peak = std::max(peak, out.values[r]);
  }
  if (peak > 0.0) {
    for (double& v : out.values) v /= peak;
  }
  return out;
}

void MetricsLog::append(MetricsRecord record) {
  if (!records_.empty() && record.epoch <= records_.back().epoch) {
    throw ContractError("MetricsLog: epoch " + std::to_string(record.epoch) +
                        " does not follow " + std::to_string(records_.back().epoch));
  }
  if (record.sharpness.size() != hidden_layers_) {
    throw ContractError("MetricsLog: expected " + std::to_string(hidden_layers_) + " sharpness values");
  }
  bool finite = std::isfinite(record.loss) && std::isfinite(record.lr) &&
                (!record.psnr || std::isfinite(*record.psnr));
  for (double s : record.sharpness) finite = finite && std::isfinite(s);
  if (!finite) throw ContractError("MetricsLog: non-finite value at epoch " + std::to_string(record.epoch));
  records_.push_back(std::move(record));
}

void MetricsLog::write_csv(std::ostream& out) const {
  out << "epoch,loss,psnr,lr";
  for (std::size_t l = 0; l < hidden_layers_; ++l) out << ",sharp_" << l;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& r : records_) {
    out << r.epoch << ',' << r.loss << ',';
    if (r.psnr) out << *r.psnr;
    out << ',' << r.lr;
    for (double s : r.sharpness) out << ',' << s;
    out << '\n';
  }
  out.precision(old_precision);
}

void MetricsLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open metrics log for writing: " + path.string());
  write_csv(out);
  if (!out) throw IoError("failed writing metrics log: " + path.string());
}

}  // namespace hosc
