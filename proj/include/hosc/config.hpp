#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hosc/mlp.hpp"
#include "hosc/optim.hpp"
#include "hosc/signals.hpp"

namespace hosc {

/// Full recipe for one training run. Text form is one `key = value` per
/// line with `#` comments; see README for the key list.
struct ExperimentConfig {
  std::string name = "run";

  // dataset: image | patches | star | sdf3d | signal1d | points
  std::string dataset = "patches";
  std::string image_path;
  std::size_t image_size = 256;
  std::size_t n_patches = 100;
  std::size_t patch_size = 4;
  std::size_t grid_size = 256;
  StarShape star;
  std::string shape3d = "sphere_minus_box";
  std::size_t sdf_samples = 200000;
  double surface_noise = 0.05;
  std::size_t signal_modes = 8;
  double signal_max_freq = 16.0;
  std::size_t signal_samples = 1024;
  std::string points_path;
  std::uint64_t data_seed = 0;

  // model: relu | sine | hosc
  std::string activation = "hosc";
  std::size_t hidden_layers = 4;
  std::size_t hidden_width = 256;
  /// Defaults: sine 30/30, hosc 30/1.
  std::optional<double> first_freq;
  std::optional<double> freq;
  /// One value for every layer, or one per hidden layer.
  std::vector<double> sharpness = {8.0};
  bool adaptive_sharpness = false;
  // auto | siren | standard (auto: standard for relu, siren otherwise)
  std::string init = "auto";
  std::uint64_t seed = 0;

  // training
  std::size_t epochs = 1000;
  /// nullopt: full batch up to 256² samples, 2^18 above. 0: full batch.
  std::optional<std::size_t> batch_size;
  double lr = 1e-4;
  LrSchedule lr_schedule = ConstantLr{};
  double weight_decay = 0.0;
  std::size_t eval_every = 1;
  /// 0: the training raster for the star, 256^3 for 3D. Otherwise a vertex grid
  /// over [-1,1]^d.
  std::size_t iou_resolution = 0;
  /// 0: dataset raster size, 256 otherwise.
  std::size_t render_size = 0;

  std::string output_dir;

  /// Throws ArgumentError on inconsistent values.
  void validate() const;

  MlpSpec mlp_spec(std::size_t in_dim, std::size_t out_dim) const;
  std::vector<double> sharpness_schedule() const;
  std::size_t effective_batch_size(std::size_t dataset_size) const;
  double resolved_first_freq() const;
  double resolved_freq() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Applies one `key = value` assignment. Throws ParseError on an unknown
/// key or a malformed value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

/// Named recipes: cameraman-1000, patches-1, patches-4, patches-16,
/// star-sdf, sdf3d-adahosc, hires-image.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

/// Directory holding bundled data files: $HOSC_DATA_DIR or the source tree's data/.
std::filesystem::path data_dir();

}  // namespace hosc
