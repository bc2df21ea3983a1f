#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hosc/error.hpp"
#include "hosc/mlp.hpp"

namespace hosc {

namespace {

constexpr std::array<char, 8> kMagic = {'H', 'O', 'S', 'C', 'M', 'L', 'P', '\0'};
// Guards against allocating absurd sizes from a corrupt file.
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 24;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void f64s(std::span<const double> v) { raw(v.data(), v.size() * sizeof(double)); }
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }

  std::uint64_t dim(const char* what) {
    const std::uint64_t v = u64();
    if (v > kMaxDim) throw ParseError(std::string("checkpoint: implausible ") + what + " " + std::to_string(v));
    return v;
  }

  Matrix matrix(std::uint64_t rows, std::uint64_t cols) {
    std::vector<double> data(rows * cols);
    raw(data.data(), data.size() * sizeof(double));
    return Matrix(rows, cols, std::move(data));
  }

  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ParseError("checkpoint: truncated file");
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const Mlp& mlp, std::ostream& out) {
  Writer w(out);
  const auto& spec = mlp.spec;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.u64(spec.in_dim);
  w.u64(spec.out_dim);
  w.u64(spec.hidden_width);
  w.u64(spec.hidden_layers);
  w.u8(static_cast<std::uint8_t>(spec.init_scheme));
  w.u64(spec.seed);
  for (const auto& act : spec.activation_per_layer) {
    double sharp = 0.0;
    bool trainable = false;
    if (const auto* h = std::get_if<Hosc>(&act)) {
      sharp = h->sharp;
      trainable = h->trainable;
    }
    w.u8(static_cast<std::uint8_t>(act.index()));
    w.f64(frequency_of(act));
    w.f64(sharp);
    w.u8(trainable ? 1 : 0);
  }
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    w.u64(mlp.weights[l].rows());
    w.u64(mlp.weights[l].cols());
    w.f64s(mlp.weights[l].values());
    w.u64(mlp.biases[l].cols());
    w.f64s(mlp.biases[l].values());
  }
  w.u64(mlp.log_sharp.size());
  w.f64s(mlp.log_sharp);
  if (!out) throw IoError("checkpoint: write failed");
}

Mlp load_checkpoint(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) throw ParseError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }

  Mlp mlp;
  auto& spec = mlp.spec;
  spec.in_dim = r.dim("in_dim");
  spec.out_dim = r.dim("out_dim");
  spec.hidden_width = r.dim("hidden_width");
  spec.hidden_layers = r.dim("hidden_layers");
  const std::uint8_t init = r.u8();
  if (init > 1) throw ParseError("checkpoint: unknown init scheme " + std::to_string(init));
  spec.init_scheme = static_cast<InitScheme>(init);
  spec.seed = r.u64();
  for (std::size_t l = 0; l < spec.hidden_layers; ++l) {
    const std::uint8_t kind = r.u8();
    const double freq = r.f64();
    const double sharp = r.f64();
    const bool trainable = r.u8() != 0;
    switch (kind) {
      case 0: spec.activation_per_layer.emplace_back(Relu{}); break;
      case 1: spec.activation_per_layer.emplace_back(Sine{freq}); break;
      case 2: spec.activation_per_layer.emplace_back(Hosc{sharp, trainable, freq}); break;
      case 3: spec.activation_per_layer.emplace_back(SquareWave{freq}); break;
      default: throw ParseError("checkpoint: unknown activation kind " + std::to_string(kind));
    }
  }
  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("checkpoint: invalid spec: ") + e.what());
  }

  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::uint64_t rows = r.dim("rows");
    const std::uint64_t cols = r.dim("cols");
    if (rows != spec.fan_in(l) || cols != spec.fan_out(l)) {
      throw ParseError("checkpoint: layer " + std::to_string(l) + " has wrong shape");
    }
    mlp.weights.push_back(r.matrix(rows, cols));
    const std::uint64_t bias_cols = r.dim("bias cols");
    if (bias_cols != cols) throw ParseError("checkpoint: bias width mismatch in layer " + std::to_string(l));
    mlp.biases.push_back(r.matrix(1, bias_cols));
  }
  const std::uint64_t n = r.dim("log_sharp count");
  if (n != spec.hidden_layers) throw ParseError("checkpoint: log_sharp count mismatch");
  mlp.log_sharp.resize(n);
  for (auto& v : mlp.log_sharp) v = r.f64();
  return mlp;
}

void save_checkpoint(const Mlp& mlp, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  save_checkpoint(mlp, out);
  out.flush();
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  return load_checkpoint(in);
}

}  // namespace hosc
