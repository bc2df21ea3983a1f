#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hosc/config.hpp"
#include "hosc/metrics.hpp"
#include "hosc/mlp.hpp"
#include "hosc/optim.hpp"
#include "hosc/signals.hpp"

namespace hosc {

struct TrainOptions {
  std::size_t epochs = 1000;
  /// 0 = full batch.
  std::size_t batch_size = 0;
  double base_lr = 1e-4;
  LrSchedule schedule = ConstantLr{};
  double weight_decay = 0.0;
  std::uint64_t shuffle_seed = 0;
  std::size_t eval_every = 1;
};

struct TrainResult {
  MetricsLog log;
  /// Full-dataset MSE and PSNR of the final parameters.
  double final_loss = 0.0;
  double final_psnr = 0.0;
};

/// Runs `epochs` passes of (forward, mse_loss, backward, adam_step) over the
/// dataset, shuffling when mini-batched. The record for epoch e (1-based)
/// holds the loss measured during pass e, i.e. after the updates of pass
/// e - 1, together with the learning rate and sharpness used in that pass.
/// Throws NumericError naming the epoch when the loss stops being finite.
TrainResult train(Mlp& mlp, const SignalDataset& dataset, const TrainOptions& options);

/// Dataset described by the config (seeded by config.data_seed).
SignalDataset build_dataset(const ExperimentConfig& config);

struct RunResult {
  MetricsLog log;
  double final_loss = 0.0;
  double final_psnr = 0.0;
  /// Occupancy IoU against the analytic shape, for star and sdf3d datasets.
  std::optional<double> iou;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
  std::vector<std::filesystem::path> rendered;
  Mlp model;
};

/// Builds dataset, model and optimizer, trains, and writes into
/// config.output_dir: metrics.csv, model.ckpt, config.txt, result.txt and
/// renders (image datasets: recon, residual, target; SDFs: zero-level
/// slices). `threads` parallelizes grid evaluation only.
RunResult run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

/// Network evaluated on the dataset's pixel grid, written as PGM (1
/// channel) or PPM (3 channels).
void render_image(const Mlp& mlp, std::size_t width, std::size_t height,
                  const std::filesystem::path& path, std::size_t threads = 1);

/// Pixel-center slice through [-1, 1]^3 perpendicular to `axis` (0, 1, 2)
/// at `offset`, or the full plane for a 2D network. Values map to gray as
/// 0.5 + 0.5 clamp(v, -1, 1), so the zero level set is mid-gray.
Image sdf_slice_image(const Mlp& mlp, std::size_t axis, double offset, std::size_t resolution,
                      std::size_t threads = 1);
void render_sdf_slice(const Mlp& mlp, std::size_t axis, double offset, std::size_t resolution,
                      const std::filesystem::path& path, std::size_t threads = 1);

/// Keeps freed activation buffers in the heap instead of returning them to
/// the OS after every epoch (glibc only; no-op elsewhere). Process-wide.
void tune_allocator();

/// Chunked batched prediction; identical results for any thread count.
Matrix predict_chunked(const Mlp& mlp, const Matrix& coords, std::size_t threads = 1);

struct EvalReport {
  double loss = 0.0;
  double psnr = 0.0;
  std::optional<double> iou;
};

/// PSNR of the model on the config's dataset, plus occupancy IoU against
/// the analytic shape for star and sdf3d datasets.
EvalReport evaluate_model(const Mlp& mlp, const ExperimentConfig& config, std::size_t threads = 1);

struct ComparisonRow {
  std::string name;
  std::string activation;
  double final_loss = 0.0;
  double final_psnr = 0.0;
  double max_psnr = 0.0;
  std::optional<double> iou;
};

struct ComparisonResult {
  std::vector<RunResult> runs;
  std::vector<ComparisonRow> summary;
  std::filesystem::path comparison_csv;
  std::filesystem::path summary_csv;
};

/// Runs every config on the same dataset (data_seed forced to `data_seed`),
/// each into out_root/<name>, and writes out_root/comparison.csv (epoch plus
/// one psnr column per run) and out_root/summary.csv. Configs must agree on
/// dataset fields unless `allow_dataset_mismatch` is set.
ComparisonResult compare_runs(std::vector<ExperimentConfig> configs, std::uint64_t data_seed,
                              const std::filesystem::path& out_root, std::size_t threads = 1,
                              bool allow_dataset_mismatch = false);

}  // namespace hosc
