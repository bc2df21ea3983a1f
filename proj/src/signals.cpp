#include "hosc/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "hosc/error.hpp"

namespace hosc {

const char* to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::Image: return "image";
    case SignalKind::Sdf2d: return "sdf2d";
    case SignalKind::Sdf3d: return "sdf3d";
    case SignalKind::Signal1d: return "signal1d";
  }
  return "unknown";
}

Matrix image_grid(std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw ArgumentError("image_grid: width and height must be >= 1");
  Matrix coords(width * height, 2);
  for (std::size_t y = 0; y < height; ++y) {
    const double cy = 2.0 * (static_cast<double>(y) + 0.5) / static_cast<double>(height) - 1.0;
    for (std::size_t x = 0; x < width; ++x) {
      const double cx = 2.0 * (static_cast<double>(x) + 0.5) / static_cast<double>(width) - 1.0;
      coords(y * width + x, 0) = cx;
      coords(y * width + x, 1) = cy;
    }
  }
  return coords;
}

SignalDataset image_dataset(const Image& image) {
  if (image.values.size() != image.width * image.height * image.channels || image.values.empty()) {
    throw DimensionError("image_dataset: malformed image");
  }
  SignalDataset ds;
  ds.kind = SignalKind::Image;
  ds.coords = image_grid(image.width, image.height);
  ds.targets = Matrix(image.width * image.height, image.channels, image.values);
  ds.domain_lo = {-1.0, -1.0};
  ds.domain_hi = {1.0, 1.0};
  ds.grid_width = image.width;
  ds.grid_height = image.height;
  return ds;
}

Image dataset_image(const SignalDataset& dataset) {
  if (dataset.grid_width * dataset.grid_height != dataset.size() || dataset.size() == 0) {
    throw ArgumentError("dataset_image: dataset is not sampled on a pixel grid");
  }
  Image image(dataset.grid_width, dataset.grid_height, dataset.out_dim());
  auto t = dataset.targets.values();
  std::copy(t.begin(), t.end(), image.values.begin());
  return image;
}

SquarePatches gen_square_patches(Rng& rng, std::size_t img_size, std::size_t n_patches,
                                 std::size_t patch_size) {
  if (img_size == 0) throw ArgumentError("gen_square_patches: image size must be >= 1");
  if (patch_size == 0 || patch_size > img_size) {
    throw ArgumentError("gen_square_patches: patch size " + std::to_string(patch_size) +
                        " must be in [1, " + std::to_string(img_size) + "]");
  }
  SquarePatches out;
  out.image = Image(img_size, img_size, 1, 0.0);
  out.patch_size = patch_size;
  const std::uint64_t positions = img_size - patch_size + 1;
  for (std::size_t k = 0; k < n_patches; ++k) {
    const auto x0 = static_cast<std::size_t>(rng.below(positions));
    const auto y0 = static_cast<std::size_t>(rng.below(positions));
    out.corners.push_back({x0, y0});
    for (std::size_t y = y0; y < y0 + patch_size; ++y)
      for (std::size_t x = x0; x < x0 + patch_size; ++x) out.image.at(x, y) = 1.0;
  }
  return out;
}

double sdf_circle(Vec2 p, double radius) { return std::hypot(p[0], p[1]) - radius; }

double sdf_sphere(Vec3 p, double radius) { return std::hypot(p[0], p[1], p[2]) - radius; }

double sdf_box(Vec3 p, Vec3 half_extents) {
  Vec3 q;
  for (int i = 0; i < 3; ++i) q[i] = std::abs(p[i]) - half_extents[i];
  const double outside = std::hypot(std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0));
  const double inside = std::min(std::max({q[0], q[1], q[2]}), 0.0);
  return outside + inside;
}

double sdf_torus(Vec3 p, double major, double minor) {
  const double ring = std::hypot(p[0], p[2]) - major;
  return std::hypot(ring, p[1]) - minor;
}

void StarShape::validate() const {
  const bool ok = points >= 3 && std::isfinite(outer_radius) && std::isfinite(inner_radius) &&
                  inner_radius > 0.0 && inner_radius < outer_radius;
  if (!ok) {
    std::ostringstream os;
    os << "StarShape: need points >= 3 and 0 < inner < outer, got points=" << points
       << " inner=" << inner_radius << " outer=" << outer_radius;
    throw ArgumentError(os.str());
  }
}

std::vector<Vec2> StarShape::vertices() const {
  validate();
  std::vector<Vec2> v(2 * points);
  const double step = std::numbers::pi / static_cast<double>(points);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double angle = std::numbers::pi / 2.0 + step * static_cast<double>(k);
    const double r = k % 2 == 0 ? outer_radius : inner_radius;
    v[k] = {r * std::cos(angle), r * std::sin(angle)};
  }
  return v;
}

namespace {

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double ex = b[0] - a[0], ey = b[1] - a[1];
  const double px = p[0] - a[0], py = p[1] - a[1];
  const double len2 = ex * ex + ey * ey;
  const double t = len2 > 0.0 ? std::clamp((px * ex + py * ey) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(px - t * ex, py - t * ey);
}

}  // namespace

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x_cross = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x_cross) inside = !inside;
    }
  }
  return inside;
}

double sdf_star(Vec2 p, const StarShape& shape) {
  const auto v = shape.vertices();
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::min(d, segment_distance(p, v[i], v[(i + 1) % v.size()]));
  }
  return point_in_polygon(p, v) ? -d : d;
}

SignalDataset star_dataset(const StarShape& shape, std::size_t width, std::size_t height) {
  shape.validate();
  SignalDataset ds;
  ds.kind = SignalKind::Sdf2d;
  ds.coords = image_grid(width, height);
  ds.targets = Matrix(ds.coords.rows(), 1);
  for (std::size_t i = 0; i < ds.coords.rows(); ++i) {
    ds.targets(i, 0) = sdf_star({ds.coords(i, 0), ds.coords(i, 1)}, shape);
  }
  ds.domain_lo = {-1.0, -1.0};
  ds.domain_hi = {1.0, 1.0};
  ds.grid_width = width;
  ds.grid_height = height;
  return ds;
}

Shape3d parse_shape3d(const std::string& name) {
  if (name == "sphere") return Shape3d::Sphere;
  if (name == "box") return Shape3d::Box;
  if (name == "torus") return Shape3d::Torus;
  if (name == "sphere_minus_box") return Shape3d::SphereMinusBox;
  throw ArgumentError("unknown 3D shape '" + name + "' (sphere, box, torus, sphere_minus_box)");
}

const char* to_string(Shape3d shape) {
  switch (shape) {
    case Shape3d::Sphere: return "sphere";
    case Shape3d::Box: return "box";
    case Shape3d::Torus: return "torus";
    case Shape3d::SphereMinusBox: return "sphere_minus_box";
  }
  return "unknown";
}

double sdf_shape3d(Shape3d shape, Vec3 p) {
  switch (shape) {
    case Shape3d::Sphere: return sdf_sphere(p, 0.6);
    case Shape3d::Box: return sdf_box(p, {0.5, 0.4, 0.3});
    case Shape3d::Torus: return sdf_torus(p, 0.5, 0.2);
    case Shape3d::SphereMinusBox: {
      const Vec3 q{p[0] - 0.35, p[1] - 0.35, p[2] - 0.35};
      return std::max(sdf_sphere(p, 0.65), -sdf_box(q, {0.3, 0.3, 0.3}));
    }
  }
  return 0.0;
}

namespace {

bool in_unit_cube(const Vec3& p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return v >= -1.0 && v <= 1.0; });
}

// Newton-style projection onto the zero level set along the numerical gradient.
bool project_to_surface(Shape3d shape, Vec3& p) {
  constexpr double h = 1e-6;
  for (int iter = 0; iter < 40; ++iter) {
    const double d = sdf_shape3d(shape, p);
    if (std::abs(d) < 1e-10) return in_unit_cube(p);
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
      Vec3 a = p, b = p;
      a[i] += h;
      b[i] -= h;
      g[i] = (sdf_shape3d(shape, a) - sdf_shape3d(shape, b)) / (2.0 * h);
    }
    const double g2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    if (g2 < 1e-12) return false;
    for (int i = 0; i < 3; ++i) p[i] -= d * g[i] / g2;
  }
  return false;
}

}  // namespace

SignalDataset gen_sdf3d_samples(Rng& rng, Shape3d shape, std::size_t n_samples, double noise) {
  if (n_samples == 0) throw ArgumentError("gen_sdf3d_samples: need at least one sample");
  SignalDataset ds;
  ds.kind = SignalKind::Sdf3d;
  ds.coords = Matrix(n_samples, 3);
  ds.targets = Matrix(n_samples, 1);
  ds.domain_lo = {-1.0, -1.0, -1.0};
  ds.domain_hi = {1.0, 1.0, 1.0};

  const std::size_t n_uniform = n_samples / 2;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vec3 p;
    if (i < n_uniform) {
      for (auto& v : p) v = rng.uniform(-1.0, 1.0);
    } else {
      Vec3 surface;
      do {
        for (auto& v : surface) v = rng.uniform(-1.0, 1.0);
      } while (!project_to_surface(shape, surface));
      do {
        for (int k = 0; k < 3; ++k) p[k] = surface[k] + noise * rng.normal();
      } while (!in_unit_cube(p));
    }
    for (int k = 0; k < 3; ++k) ds.coords(i, k) = p[k];
    ds.targets(i, 0) = sdf_shape3d(shape, p);
  }
  return ds;
}

SignalDataset signal1d_from_modes(const std::vector<SineMode>& modes, std::size_t n_samples) {
  if (modes.empty()) throw ArgumentError("signal1d: need at least one mode");
  if (n_samples == 0) throw ArgumentError("signal1d: need at least one sample");
  SignalDataset ds;
  ds.kind = SignalKind::Signal1d;
  ds.coords = Matrix(n_samples, 1);
  ds.targets = Matrix(n_samples, 1);
  ds.domain_lo = {-1.0};
  ds.domain_hi = {1.0};
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double x =
        n_samples == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    double s = 0.0;
    for (const auto& m : modes) s += m.amplitude * std::sin(2.0 * std::numbers::pi * m.freq * x + m.phase);
    ds.coords(i, 0) = x;
    ds.targets(i, 0) = s;
  }
  return ds;
}

SignalDataset gen_signal1d(Rng& rng, std::size_t n_modes, double max_freq, std::size_t n_samples,
                           std::vector<SineMode>* modes_out) {
  if (n_modes == 0) throw ArgumentError("gen_signal1d: n_modes must be >= 1");
  if (!(max_freq >= 1.0)) throw ArgumentError("gen_signal1d: max_freq must be >= 1");
  std::vector<SineMode> modes(n_modes);
  for (auto& m : modes) {
    m.amplitude = rng.uniform(-1.0, 1.0);
    m.freq = max_freq > 1.0 ? rng.uniform(1.0, max_freq) : 1.0;
    m.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  if (modes_out != nullptr) *modes_out = modes;
  return signal1d_from_modes(modes, n_samples);
}

SignalDataset load_point_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open point samples: " + path.string());

  std::vector<double> coords;
  std::vector<double> targets;
  std::size_t columns = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
      }
      row.push_back(v);
    }
    if (row.size() != 3 && row.size() != 4) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 3 or 4 fields, got " +
                       std::to_string(row.size()));
    }
    if (columns == 0) columns = row.size();
    if (row.size() != columns) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " fields like the first row, got " +
                       std::to_string(row.size()));
    }
    coords.insert(coords.end(), row.begin(), row.end() - 1);
    targets.push_back(row.back());
  }
  if (targets.empty()) throw ParseError(path.string() + ": no samples");

  SignalDataset ds;
  const std::size_t dims = columns - 1;
  const std::size_t n = targets.size();
  ds.kind = dims == 3 ? SignalKind::Sdf3d : SignalKind::Sdf2d;
  ds.coords = Matrix(n, dims, std::move(coords));
  ds.targets = Matrix(n, 1, std::move(targets));
  ds.domain_lo.assign(dims, std::numeric_limits<double>::infinity());
  ds.domain_hi.assign(dims, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < ds.coords.rows(); ++i) {
    for (std::size_t k = 0; k < dims; ++k) {
      ds.domain_lo[k] = std::min(ds.domain_lo[k], ds.coords(i, k));
      ds.domain_hi[k] = std::max(ds.domain_hi[k], ds.coords(i, k));
    }
  }
  return ds;
}

void save_point_samples(const SignalDataset& dataset, const std::filesystem::path& path) {
  if (dataset.out_dim() != 1 || (dataset.in_dim() != 2 && dataset.in_dim() != 3)) {
    throw ArgumentError("save_point_samples: need 2D or 3D coordinates with one target");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open point samples for writing: " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t k = 0; k < dataset.in_dim(); ++k) out << dataset.coords(i, k) << ' ';
    out << dataset.targets(i, 0) << '\n';
  }
  if (!out) throw IoError("failed writing point samples: " + path.string());
}

}  // namespace hosc
