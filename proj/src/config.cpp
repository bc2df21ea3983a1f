#include "hosc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hosc/error.hpp"

#ifndef HOSC_DEFAULT_DATA_DIR
#define HOSC_DEFAULT_DATA_DIR "data"
#endif

namespace hosc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ParseError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a non-negative integer");
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(key, value, "a finite number");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) bad_value(key, value, "a comma-separated list of numbers");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  auto size_setter = [](std::size_t ExperimentConfig::*field) -> Setter {
    return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.*field = static_cast<std::size_t>(parse_uint(k, v));
    };
  };
  auto double_setter = [](double ExperimentConfig::*field) -> Setter {
    return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
      c.*field = parse_double(k, v);
    };
  };
  auto string_setter = [](std::string ExperimentConfig::*field) -> Setter {
    return [field](ExperimentConfig& c, const std::string&, const std::string& v) { c.*field = v; };
  };
  static const std::map<std::string, Setter> table = {
      {"name", string_setter(&ExperimentConfig::name)},
      {"dataset", string_setter(&ExperimentConfig::dataset)},
      {"image_path", string_setter(&ExperimentConfig::image_path)},
      {"image_size", size_setter(&ExperimentConfig::image_size)},
      {"n_patches", size_setter(&ExperimentConfig::n_patches)},
      {"patch_size", size_setter(&ExperimentConfig::patch_size)},
      {"grid_size", size_setter(&ExperimentConfig::grid_size)},
      {"star_points", [](auto& c, auto& k, auto& v) { c.star.points = parse_uint(k, v); }},
      {"star_outer", [](auto& c, auto& k, auto& v) { c.star.outer_radius = parse_double(k, v); }},
      {"star_inner", [](auto& c, auto& k, auto& v) { c.star.inner_radius = parse_double(k, v); }},
      {"shape3d", string_setter(&ExperimentConfig::shape3d)},
      {"sdf_samples", size_setter(&ExperimentConfig::sdf_samples)},
      {"surface_noise", double_setter(&ExperimentConfig::surface_noise)},
      {"signal_modes", size_setter(&ExperimentConfig::signal_modes)},
      {"signal_max_freq", double_setter(&ExperimentConfig::signal_max_freq)},
      {"signal_samples", size_setter(&ExperimentConfig::signal_samples)},
      {"points_path", string_setter(&ExperimentConfig::points_path)},
      {"data_seed", [](auto& c, auto& k, auto& v) { c.data_seed = parse_uint(k, v); }},
      {"activation", string_setter(&ExperimentConfig::activation)},
      {"hidden_layers", size_setter(&ExperimentConfig::hidden_layers)},
      {"hidden_width", size_setter(&ExperimentConfig::hidden_width)},
      {"first_freq", [](auto& c, auto& k, auto& v) { c.first_freq = parse_double(k, v); }},
      {"freq", [](auto& c, auto& k, auto& v) { c.freq = parse_double(k, v); }},
      {"sharpness", [](auto& c, auto& k, auto& v) { c.sharpness = parse_list(k, v); }},
      {"adaptive_sharpness", [](auto& c, auto& k, auto& v) { c.adaptive_sharpness = parse_bool(k, v); }},
      {"init", string_setter(&ExperimentConfig::init)},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_uint(k, v); }},
      {"epochs", size_setter(&ExperimentConfig::epochs)},
      {"batch_size",
       [](auto& c, auto& k, auto& v) {
         if (v == "auto") {
           c.batch_size.reset();
         } else {
           c.batch_size = static_cast<std::size_t>(parse_uint(k, v));
         }
       }},
      {"lr", double_setter(&ExperimentConfig::lr)},
      {"lr_schedule",
       [](auto& c, auto& k, auto& v) {
         if (v == "constant") {
           c.lr_schedule = ConstantLr{};
         } else if (v == "step") {
           if (!std::holds_alternative<StepDecayLr>(c.lr_schedule)) c.lr_schedule = StepDecayLr{};
         } else {
           bad_value(k, v, "constant or step");
         }
       }},
      {"lr_gamma",
       [](auto& c, auto& k, auto& v) {
         if (!std::holds_alternative<StepDecayLr>(c.lr_schedule)) c.lr_schedule = StepDecayLr{};
         std::get<StepDecayLr>(c.lr_schedule).gamma = parse_double(k, v);
       }},
      {"lr_every",
       [](auto& c, auto& k, auto& v) {
         if (!std::holds_alternative<StepDecayLr>(c.lr_schedule)) c.lr_schedule = StepDecayLr{};
         std::get<StepDecayLr>(c.lr_schedule).every = parse_uint(k, v);
       }},
      {"weight_decay", double_setter(&ExperimentConfig::weight_decay)},
      {"eval_every", size_setter(&ExperimentConfig::eval_every)},
      {"iou_resolution", size_setter(&ExperimentConfig::iou_resolution)},
      {"render_size", size_setter(&ExperimentConfig::render_size)},
      {"output_dir", string_setter(&ExperimentConfig::output_dir)},
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ParseError("unknown config key '" + key + "'");
  it->second(config, key, value);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "name = " << c.name << '\n'
     << "dataset = " << c.dataset << '\n'
     << "image_path = " << c.image_path << '\n'
     << "image_size = " << c.image_size << '\n'
     << "n_patches = " << c.n_patches << '\n'
     << "patch_size = " << c.patch_size << '\n'
     << "grid_size = " << c.grid_size << '\n'
     << "star_points = " << c.star.points << '\n'
     << "star_outer = " << fmt(c.star.outer_radius) << '\n'
     << "star_inner = " << fmt(c.star.inner_radius) << '\n'
     << "shape3d = " << c.shape3d << '\n'
     << "sdf_samples = " << c.sdf_samples << '\n'
     << "surface_noise = " << fmt(c.surface_noise) << '\n'
     << "signal_modes = " << c.signal_modes << '\n'
     << "signal_max_freq = " << fmt(c.signal_max_freq) << '\n'
     << "signal_samples = " << c.signal_samples << '\n'
     << "points_path = " << c.points_path << '\n'
     << "data_seed = " << c.data_seed << '\n'
     << "activation = " << c.activation << '\n'
     << "hidden_layers = " << c.hidden_layers << '\n'
     << "hidden_width = " << c.hidden_width << '\n';
  if (c.first_freq) os << "first_freq = " << fmt(*c.first_freq) << '\n';
  if (c.freq) os << "freq = " << fmt(*c.freq) << '\n';
  os << "sharpness = " << fmt_list(c.sharpness) << '\n'
     << "adaptive_sharpness = " << (c.adaptive_sharpness ? "true" : "false") << '\n'
     << "init = " << c.init << '\n'
     << "seed = " << c.seed << '\n'
     << "epochs = " << c.epochs << '\n'
     << "batch_size = " << (c.batch_size ? std::to_string(*c.batch_size) : "auto") << '\n'
     << "lr = " << fmt(c.lr) << '\n';
  if (const auto* s = std::get_if<StepDecayLr>(&c.lr_schedule)) {
    os << "lr_schedule = step\nlr_gamma = " << fmt(s->gamma) << "\nlr_every = " << s->every << '\n';
  } else {
    os << "lr_schedule = constant\n";
  }
  os << "weight_decay = " << fmt(c.weight_decay) << '\n'
     << "eval_every = " << c.eval_every << '\n'
     << "iou_resolution = " << c.iou_resolution << '\n'
     << "render_size = " << c.render_size << '\n'
     << "output_dir = " << c.output_dir << '\n';
  return os.str();
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ArgumentError("config: " + msg); };
  static const std::vector<std::string> datasets = {"image", "patches", "star", "sdf3d", "signal1d", "points"};
  if (std::find(datasets.begin(), datasets.end(), dataset) == datasets.end()) {
    fail("unknown dataset '" + dataset + "'");
  }
  if (activation != "relu" && activation != "sine" && activation != "hosc") {
    fail("unknown activation '" + activation + "' (relu, sine, hosc)");
  }
  if (init != "auto" && init != "siren" && init != "standard") fail("unknown init '" + init + "'");
  if (dataset == "image" && image_path.empty()) fail("dataset 'image' needs image_path");
  if (dataset == "points" && points_path.empty()) fail("dataset 'points' needs points_path");
  if (dataset == "patches" && (image_size == 0 || patch_size == 0 || patch_size > image_size)) {
    fail("patches need 1 <= patch_size <= image_size");
  }
  if (dataset == "star") {
    if (grid_size == 0) fail("grid_size must be >= 1");
    star.validate();
  }
  if (dataset == "sdf3d") {
    parse_shape3d(shape3d);
    if (sdf_samples == 0) fail("sdf_samples must be >= 1");
    if (!(surface_noise > 0.0)) fail("surface_noise must be positive");
  }
  if (dataset == "signal1d" && (signal_modes == 0 || signal_samples == 0 || !(signal_max_freq >= 1.0))) {
    fail("signal1d needs signal_modes >= 1, signal_samples >= 1, signal_max_freq >= 1");
  }
  if (hidden_layers == 0 || hidden_width == 0) fail("hidden_layers and hidden_width must be >= 1");
  if (sharpness.size() != 1 && sharpness.size() != hidden_layers) {
    fail("sharpness schedule has " + std::to_string(sharpness.size()) + " entries for " +
         std::to_string(hidden_layers) + " hidden layers");
  }
  for (double s : sharpness) {
    if (!(s > 0.0)) fail("sharpness values must be positive");
  }
  if (adaptive_sharpness && activation != "hosc") fail("adaptive_sharpness requires activation = hosc");
  if (!(resolved_first_freq() > 0.0) || !(resolved_freq() > 0.0)) fail("frequencies must be positive");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (eval_every == 0) fail("eval_every must be >= 1");
  if (iou_resolution == 1) fail("iou_resolution must be 0 (auto) or >= 2");
  hosc::validate(lr_schedule);
}

double ExperimentConfig::resolved_first_freq() const { return first_freq.value_or(30.0); }

double ExperimentConfig::resolved_freq() const {
  return freq.value_or(activation == "sine" ? 30.0 : 1.0);
}

std::vector<double> ExperimentConfig::sharpness_schedule() const {
  if (sharpness.size() == hidden_layers) return sharpness;
  return std::vector<double>(hidden_layers, sharpness.empty() ? 1.0 : sharpness.front());
}

MlpSpec ExperimentConfig::mlp_spec(std::size_t in_dim, std::size_t out_dim) const {
  MlpSpec spec;
  spec.in_dim = in_dim;
  spec.out_dim = out_dim;
  spec.hidden_width = hidden_width;
  spec.hidden_layers = hidden_layers;
  spec.seed = seed;
  if (activation == "relu") {
    spec.activation_per_layer = relu_layers(hidden_layers);
  } else if (activation == "sine") {
    spec.activation_per_layer = sine_layers(hidden_layers, resolved_first_freq(), resolved_freq());
  } else {
    spec.activation_per_layer =
        hosc_layers(sharpness_schedule(), resolved_first_freq(), resolved_freq(), adaptive_sharpness);
  }
  if (init == "siren") {
    spec.init_scheme = InitScheme::SirenUniform;
  } else if (init == "standard") {
    spec.init_scheme = InitScheme::StandardUniform;
  } else {
    spec.init_scheme = activation == "relu" ? InitScheme::StandardUniform : InitScheme::SirenUniform;
  }
  return spec;
}

std::size_t ExperimentConfig::effective_batch_size(std::size_t dataset_size) const {
  constexpr std::size_t kFullBatchLimit = 256 * 256;
  constexpr std::size_t kLargeBatch = std::size_t{1} << 18;
  std::size_t b = batch_size ? *batch_size : (dataset_size <= kFullBatchLimit ? 0 : kLargeBatch);
  if (b == 0 || b > dataset_size) b = dataset_size;
  return b;
}

std::vector<std::string> preset_names() {
  return {"cameraman-1000", "patches-1", "patches-4", "patches-16",
          "star-sdf",       "sdf3d-adahosc", "hires-image"};
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("HOSC_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return HOSC_DEFAULT_DATA_DIR;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.activation = "hosc";
  c.hidden_layers = 4;
  c.hidden_width = 256;
  c.lr = 1e-4;

  if (name == "cameraman-1000") {
    c.dataset = "image";
    c.image_path = (data_dir() / "cameraman.pgm").string();
    c.sharpness = {8.0};
    c.epochs = 1000;
    c.lr_schedule = StepDecayLr{0.1, 2000};
  } else if (name == "patches-1" || name == "patches-4" || name == "patches-16") {
    c.dataset = "patches";
    c.image_size = 256;
    c.n_patches = 100;
    c.patch_size = static_cast<std::size_t>(std::stoul(name.substr(name.find('-') + 1)));
    c.sharpness = {2.0, 4.0, 8.0, 16.0};
    c.epochs = 5000;
    c.lr_schedule = StepDecayLr{0.1, 2000};
  } else if (name == "star-sdf") {
    c.dataset = "star";
    c.grid_size = 256;
    c.hidden_width = 512;
    c.sharpness = {8.0};
    c.epochs = 5000;
  } else if (name == "sdf3d-adahosc") {
    c.dataset = "sdf3d";
    c.shape3d = "sphere_minus_box";
    c.sdf_samples = 200000;
    c.hidden_layers = 5;
    c.sharpness = {8.0};
    c.adaptive_sharpness = true;
    c.epochs = 20;
    c.batch_size = 1024;
    c.iou_resolution = 256;
  } else if (name == "hires-image") {
    c.dataset = "image";
    c.image_path = (data_dir() / "cameraman.pgm").string();
    c.sharpness = {8.0};
    c.epochs = 100;
    c.batch_size = std::size_t{1} << 18;
  } else {
    throw ArgumentError("unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace hosc
