#pragma once

#include <cstddef>
#include <string>

#include "mfdepth/grid.hpp"

namespace mfdepth {

struct PfmParseError : std::runtime_error {
  std::size_t byte_offset;
  PfmParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

/// Grayscale PFM: "Pf", "<width> <height>", a scale line whose sign encodes
/// endianness (negative = little-endian), then 32-bit float rows written
/// bottom to top. Non-finite values are refused.
void export_pfm(const GridF& map, const std::string& path);

/// Inverse of export_pfm; round-trips bit-exactly. Rejects anything but the
/// "Pf" grayscale header with a PfmParseError carrying the byte offset.
GridF import_pfm(const std::string& path);

/// 8-bit binary PPM for rendered images (inspection output only).
void export_ppm(const Image& image, const std::string& path);

}  // namespace mfdepth
