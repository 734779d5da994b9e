#include "mfdepth/pfm.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace mfdepth;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Pfm, RoundTripIsBitExact) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<float> vd(-1e6f, 1e6f);
  std::uniform_int_distribution<int> sd(1, 37);
  const std::string path = temp_path("mfdepth_roundtrip.pfm");
  for (int trial = 0; trial < 25; ++trial) {
    GridF map(sd(rng), sd(rng));
    for (float& v : map.data()) v = vd(rng);
    export_pfm(map, path);
    const GridF back = import_pfm(path);
    ASSERT_EQ(back.height(), map.height());
    ASSERT_EQ(back.width(), map.width());
    EXPECT_EQ(back.data(), map.data());
  }
  std::remove(path.c_str());
}

TEST(Pfm, DocumentedLayout) {
  // 2x2 map [[1,2],[3,4]]: "Pf\n2 2\n-1.0\n", then rows bottom-to-top as
  // little-endian f32: 3,4,1,2 (16 payload bytes).
  GridF map(2, 2);
  map(0, 0) = 1;
  map(0, 1) = 2;
  map(1, 0) = 3;
  map(1, 1) = 4;
  const std::string path = temp_path("mfdepth_layout.pfm");
  export_pfm(map, path);

  std::ifstream in(path, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  const std::string header = "Pf\n2 2\n-1.0\n";
  ASSERT_EQ(contents.substr(0, header.size()), header);
  ASSERT_EQ(contents.size(), header.size() + 16);
  const float* payload =
      reinterpret_cast<const float*>(contents.data() + header.size());
  EXPECT_EQ(payload[0], 3.0f);
  EXPECT_EQ(payload[1], 4.0f);
  EXPECT_EQ(payload[2], 1.0f);
  EXPECT_EQ(payload[3], 2.0f);
  std::remove(path.c_str());
}

TEST(Pfm, ColorHeaderRejected) {
  const std::string path = temp_path("mfdepth_color.pfm");
  write_bytes(path, "PF\n2 2\n-1.0\n0123456789abcdef0123456789abcdef0123456789abcdef");
  EXPECT_THROW(import_pfm(path), PfmParseError);
  try {
    import_pfm(path);
  } catch (const PfmParseError& e) {
    EXPECT_EQ(e.byte_offset, 0u);  // offset points at the bad magic
  }
  std::remove(path.c_str());
}

TEST(Pfm, NonFiniteValuesRefused) {
  GridF map(2, 2, 1.0f);
  map(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(export_pfm(map, temp_path("mfdepth_nan.pfm")),
               std::invalid_argument);
  map(1, 1) = std::numeric_limits<float>::infinity();
  EXPECT_THROW(export_pfm(map, temp_path("mfdepth_inf.pfm")),
               std::invalid_argument);
}

TEST(Pfm, TruncatedPayloadReportsOffset) {
  const std::string path = temp_path("mfdepth_trunc.pfm");
  write_bytes(path, "Pf\n4 4\n-1.0\nshort");
  EXPECT_THROW(import_pfm(path), PfmParseError);
  std::remove(path.c_str());
}

TEST(Pfm, MalformedDimensionsRejected) {
  const std::string path = temp_path("mfdepth_dims.pfm");
  write_bytes(path, "Pf\ntwo 2\n-1.0\n");
  EXPECT_THROW(import_pfm(path), PfmParseError);
  write_bytes(path, "Pf\n0 2\n-1.0\n");
  EXPECT_THROW(import_pfm(path), PfmParseError);
  std::remove(path.c_str());
}

TEST(Pfm, BigEndianScaleIsByteswapped) {
  // Hand-build a big-endian file for the value 1.0f and read it back.
  const std::string path = temp_path("mfdepth_be.pfm");
  std::string bytes = "Pf\n1 1\n1.0\n";
  bytes += '\x3f';
  bytes += '\x80';
  bytes += '\x00';
  bytes += '\x00';
  write_bytes(path, bytes);
  const GridF map = import_pfm(path);
  EXPECT_EQ(map(0, 0), 1.0f);
  std::remove(path.c_str());
}

TEST(Ppm, WritesExpectedHeaderAndSize) {
  Image img(4, 6, 0.5f);
  const std::string path = temp_path("mfdepth_img.ppm");
  export_ppm(img, path);
  std::ifstream in(path, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  const std::string header = "P6\n6 4\n255\n";
  ASSERT_EQ(contents.substr(0, header.size()), header);
  EXPECT_EQ(contents.size(), header.size() + 4 * 6 * 3);
  std::remove(path.c_str());
}
