// hosc: train and evaluate coordinate MLPs with HOSC, sine and ReLU activations.
//
//   hosc fit <config|preset> [--set key=value]... [--out DIR] [--threads N]
//   hosc compare <config|preset>... --seed N [--set key=value]... [--out DIR]
//   hosc render <checkpoint> --out <path> [--slice axis=z,offset=0] [--size N]
//   hosc eval <checkpoint> --dataset <config|preset> [--set key=value]...
//   hosc presets [--show NAME]

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hosc/config.hpp"
#include "hosc/error.hpp"
#include "hosc/experiment.hpp"
#include "hosc/mlp.hpp"

namespace fs = std::filesystem;

namespace {

int exit_code(hosc::ErrorCategory category) {
  switch (category) {
    case hosc::ErrorCategory::Argument: return 3;
    case hosc::ErrorCategory::Dimension: return 4;
    case hosc::ErrorCategory::Numeric: return 5;
    case hosc::ErrorCategory::Contract: return 6;
    case hosc::ErrorCategory::Parse: return 7;
    case hosc::ErrorCategory::Io: return 8;
  }
  return 1;
}

fs::path output_root() {
  if (const char* env = std::getenv("HOSC_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

bool is_preset(const std::string& name) {
  for (const auto& p : hosc::preset_names()) {
    if (p == name) return true;
  }
  return false;
}

// A config argument is a file path, "preset:NAME", or a bare preset name.
hosc::ExperimentConfig resolve_config(const std::string& arg) {
  if (arg.rfind("preset:", 0) == 0) return hosc::preset(arg.substr(7));
  if (fs::exists(arg)) return hosc::load_config(arg);
  if (is_preset(arg)) return hosc::preset(arg);
  throw hosc::IoError("no config file or preset named '" + arg + "'");
}

void apply_overrides(hosc::ExperimentConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw hosc::ParseError("--set expects key=value, got '" + kv + "'");
    hosc::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

std::size_t parse_axis(const std::string& axis) {
  if (axis == "x" || axis == "0") return 0;
  if (axis == "y" || axis == "1") return 1;
  if (axis == "z" || axis == "2") return 2;
  throw hosc::ParseError("slice axis must be x, y or z, got '" + axis + "'");
}

void print_result(const std::string& name, const hosc::RunResult& r) {
  std::cout << name << ": final_loss=" << r.final_loss << " final_psnr=" << r.final_psnr;
  if (r.iou) std::cout << " iou=" << *r.iou;
  std::cout << "\n  checkpoint " << r.checkpoint_path.string() << "\n  metrics    " << r.metrics_path.string()
            << '\n';
  for (const auto& p : r.rendered) std::cout << "  output     " << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  hosc::tune_allocator();
  CLI::App app{"Coordinate-MLP fitting with HOSC, sine and ReLU activations"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "Threads for grid evaluation (1 = byte-deterministic)")
      ->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Run one experiment");
  std::string fit_config;
  std::vector<std::string> fit_sets;
  std::string fit_out;
  fit->add_option("config", fit_config, "Config file or preset name")->required();
  fit->add_option("--set", fit_sets, "Override a config key (key=value)");
  fit->add_option("--out", fit_out, "Output directory");

  auto* compare = app.add_subcommand("compare", "Run several configs on the same dataset");
  std::vector<std::string> cmp_configs;
  std::vector<std::string> cmp_sets;
  std::uint64_t cmp_seed = 0;
  std::string cmp_out;
  bool cmp_mismatch = false;
  compare->add_option("configs", cmp_configs, "Config files or preset names")->required();
  compare->add_option("--seed", cmp_seed, "Shared dataset seed")->required();
  compare->add_option("--set", cmp_sets, "Override a key in every config (key=value)");
  compare->add_option("--out", cmp_out, "Output directory");
  compare->add_flag("--allow-dataset-mismatch", cmp_mismatch, "Permit configs with different datasets");

  auto* render = app.add_subcommand("render", "Render a checkpoint to PGM/PPM");
  std::string render_ckpt;
  std::string render_out;
  std::string render_slice;
  std::size_t render_size = 256;
  std::size_t render_width = 0;
  std::size_t render_height = 0;
  render->add_option("checkpoint", render_ckpt, "Model checkpoint")->required();
  render->add_option("--out", render_out, "Output image path")->required();
  render->add_option("--slice", render_slice, "SDF slice, e.g. axis=z,offset=0");
  render->add_option("--size", render_size, "Square output size")->check(CLI::PositiveNumber);
  render->add_option("--width", render_width, "Image width (image networks)");
  render->add_option("--height", render_height, "Image height (image networks)");

  auto* eval = app.add_subcommand("eval", "Report PSNR (and IoU for SDFs) of a checkpoint");
  std::string eval_ckpt;
  std::string eval_dataset;
  std::vector<std::string> eval_sets;
  eval->add_option("checkpoint", eval_ckpt, "Model checkpoint")->required();
  eval->add_option("--dataset", eval_dataset, "Config or preset describing the dataset")->required();
  eval->add_option("--set", eval_sets, "Override a config key (key=value)");

  auto* presets = app.add_subcommand("presets", "List presets or print one as a config file");
  std::string preset_show;
  presets->add_option("--show", preset_show, "Preset to print");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      auto config = resolve_config(fit_config);
      apply_overrides(config, fit_sets);
      if (!fit_out.empty()) config.output_dir = fit_out;
      if (config.output_dir.empty()) config.output_dir = (output_root() / config.name).string();
      const auto result = hosc::run_experiment(config, threads);
      print_result(config.name, result);
    } else if (*compare) {
      std::vector<hosc::ExperimentConfig> configs;
      for (const auto& c : cmp_configs) {
        configs.push_back(resolve_config(c));
        apply_overrides(configs.back(), cmp_sets);
      }
      const fs::path root = cmp_out.empty() ? output_root() / "compare" : fs::path(cmp_out);
      const auto result = hosc::compare_runs(configs, cmp_seed, root, threads, cmp_mismatch);
      std::cout << "name,activation,final_psnr,max_psnr,iou\n";
      for (const auto& row : result.summary) {
        std::cout << row.name << ',' << row.activation << ',' << row.final_psnr << ',' << row.max_psnr << ',';
        if (row.iou) std::cout << *row.iou;
        std::cout << '\n';
      }
      std::cout << "comparison " << result.comparison_csv.string() << "\nsummary    "
                << result.summary_csv.string() << '\n';
    } else if (*render) {
      const auto mlp = hosc::load_checkpoint(fs::path(render_ckpt));
      if (!render_slice.empty() || mlp.spec.in_dim == 3) {
        std::size_t axis = 2;
        double offset = 0.0;
        std::stringstream ss(render_slice);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw hosc::ParseError("--slice expects key=value pairs");
          const std::string key = item.substr(0, eq);
          const std::string value = item.substr(eq + 1);
          if (key == "axis") {
            axis = parse_axis(value);
          } else if (key == "offset") {
            offset = std::stod(value);
          } else {
            throw hosc::ParseError("unknown --slice key '" + key + "'");
          }
        }
        hosc::render_sdf_slice(mlp, axis, offset, render_size, render_out, threads);
      } else {
        const std::size_t w = render_width != 0 ? render_width : render_size;
        const std::size_t h = render_height != 0 ? render_height : render_size;
        hosc::render_image(mlp, w, h, render_out, threads);
      }
      std::cout << render_out << '\n';
    } else if (*eval) {
      const auto mlp = hosc::load_checkpoint(fs::path(eval_ckpt));
      auto config = resolve_config(eval_dataset);
      apply_overrides(config, eval_sets);
      const auto report = hosc::evaluate_model(mlp, config, threads);
      std::cout << "loss = " << report.loss << "\npsnr = " << report.psnr << '\n';
      if (report.iou) std::cout << "iou = " << *report.iou << '\n';
    } else if (*presets) {
      if (preset_show.empty()) {
        for (const auto& p : hosc::preset_names()) std::cout << p << '\n';
      } else {
        std::cout << hosc::to_text(hosc::preset(preset_show));
      }
    }
  } catch (const hosc::Error& e) {
    std::cerr << "error (" << hosc::to_string(e.category()) << "): " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
