#include "mfdepth/pfm.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace mfdepth {

namespace {

float byteswap_f32(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  bits = __builtin_bswap32(bits);
  std::memcpy(&v, &bits, 4);
  return v;
}

constexpr bool host_little_endian() {
  return std::endian::native == std::endian::little;
}

// Reads one whitespace-terminated token, tracking the byte offset.
std::string next_token(std::istream& in, std::size_t* offset) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    ++*offset;
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

}  // namespace

void export_pfm(const GridF& map, const std::string& path) {
  if (map.empty()) throw std::invalid_argument("export_pfm: empty map");
  for (const float v : map.data())
    if (!std::isfinite(v))
      throw std::invalid_argument("export_pfm: non-finite value refused");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_pfm: cannot open " + path);

  const double scale = host_little_endian() ? -1.0 : 1.0;
  char header[64];
  const int len = std::snprintf(header, sizeof(header), "Pf\n%d %d\n%.1f\n",
                                map.width(), map.height(), scale);
  out.write(header, len);
  for (int y = map.height() - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(&map(y, 0)),
              static_cast<std::streamsize>(map.width()) * 4);
  }
  if (!out) throw std::runtime_error("export_pfm: write failed for " + path);
}

GridF import_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("import_pfm: cannot open " + path);

  std::size_t offset = 0;
  const std::string magic = next_token(in, &offset);
  if (magic != "Pf")
    throw PfmParseError("import_pfm: expected grayscale magic 'Pf', got '" +
                            magic + "'",
                        offset >= magic.size() ? offset - magic.size() : 0);

  const std::string ws = next_token(in, &offset);
  const std::string hs = next_token(in, &offset);
  int width = 0, height = 0;
  try {
    width = std::stoi(ws);
    height = std::stoi(hs);
  } catch (const std::exception&) {
    throw PfmParseError("import_pfm: bad dimensions", offset);
  }
  if (width <= 0 || height <= 0)
    throw PfmParseError("import_pfm: non-positive dimensions", offset);

  const std::string ss = next_token(in, &offset);
  double scale = 0.0;
  try {
    scale = std::stod(ss);
  } catch (const std::exception&) {
    throw PfmParseError("import_pfm: bad scale line", offset);
  }
  if (scale == 0.0)
    throw PfmParseError("import_pfm: zero scale", offset);
  const bool file_little = scale < 0.0;

  GridF map(height, width);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(&map(y, 0)),
            static_cast<std::streamsize>(width) * 4);
    if (in.gcount() != static_cast<std::streamsize>(width) * 4)
      throw PfmParseError("import_pfm: truncated pixel data",
                          offset + (static_cast<std::size_t>(height) - 1 - y) *
                                       width * 4);
  }
  if (file_little != host_little_endian())
    for (float& v : map.data()) v = byteswap_f32(v);
  return map;
}

void export_ppm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_ppm: cannot open " + path);
  char header[64];
  const int len = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n",
                                image.width(), image.height());
  out.write(header, len);
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width()) * 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x)
      for (int c = 0; c < 3; ++c)
        row[static_cast<std::size_t>(x) * 3 + c] = static_cast<unsigned char>(
            std::clamp(image.at(y, x, c), 0.0f, 1.0f) * 255.0f + 0.5f);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace mfdepth
