#include "hosc/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "hosc/error.hpp"

namespace hosc {

namespace {

// Header tokens are separated by whitespace; '#' starts a comment running to end of line.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty()) throw ParseError("netpbm: unexpected end of header in " + path.string());
  return token;
}

std::size_t header_number(std::istream& in, const std::filesystem::path& path, const char* what) {
  const std::string token = next_token(in, path);
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ParseError(std::string("netpbm: bad ") + what + " '" + token + "' in " + path.string());
  }
  return std::stoul(token);
}

}  // namespace

Image read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());

  const std::string magic = next_token(in, path);
  std::size_t channels = 0;
  bool binary = true;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else if (magic == "P2") {
    channels = 1;
    binary = false;
  } else if (magic == "P3") {
    channels = 3;
    binary = false;
  } else {
    throw ParseError("netpbm: unsupported magic '" + magic + "' in " + path.string());
  }

  const std::size_t width = header_number(in, path, "width");
  const std::size_t height = header_number(in, path, "height");
  const std::size_t maxval = header_number(in, path, "maxval");
  if (width == 0 || height == 0) throw ParseError("netpbm: empty image " + path.string());
  if (maxval == 0 || maxval > 255) {
    throw ParseError("netpbm: only 8-bit images are supported (maxval " + std::to_string(maxval) +
                     ") in " + path.string());
  }

  Image image(width, height, channels);
  const auto denom = static_cast<double>(maxval);
  if (binary) {
    // exactly one whitespace byte separates maxval from the raster, consumed by next_token
    std::vector<unsigned char> raster(image.values.size());
    in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
    if (static_cast<std::size_t>(in.gcount()) != raster.size()) {
      throw ParseError("netpbm: truncated raster in " + path.string());
    }
    for (std::size_t i = 0; i < raster.size(); ++i) {
      if (raster[i] > maxval) throw ParseError("netpbm: sample above maxval in " + path.string());
      image.values[i] = raster[i] / denom;
    }
  } else {
    for (auto& v : image.values) {
      const std::size_t sample = header_number(in, path, "sample");
      if (sample > maxval) throw ParseError("netpbm: sample above maxval in " + path.string());
      v = static_cast<double>(sample) / denom;
    }
  }
  return image;
}

void write_netpbm(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw ArgumentError("write_netpbm: need 1 or 3 channels, got " + std::to_string(image.channels));
  }
  if (image.values.size() != image.width * image.height * image.channels) {
    throw DimensionError("write_netpbm: value count does not match image shape");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open image for writing: " + path.string());
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> raster(image.values.size());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::clamp(image.values[i], 0.0, 1.0);
    raster[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("failed writing image: " + path.string());
}

}  // namespace hosc
