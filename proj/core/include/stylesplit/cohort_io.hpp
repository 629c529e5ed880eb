#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "stylesplit/mask.hpp"

namespace stylesplit {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// On-disk scan layout: <root>/<scan id>/{meta.json, image_###.pgm, mask_###.pgm}.
// Rasters are binary 8-bit PGM (P5). Mask rasters hold 0 or 255; images are
// intensities in [0, 1] quantised to 1/255 steps.

void write_pgm(const std::filesystem::path& path, const Grid<std::uint8_t>& raster);
Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);

void write_scan(const std::filesystem::path& scan_dir, const Scan& scan);
Scan read_scan(const std::filesystem::path& scan_dir);

/// Writes every scan under `root/<id>`.
void write_scans(const std::filesystem::path& root, const std::vector<Scan>& scans);

/// Reads every scan directory (one containing meta.json) under `root`,
/// ordered by directory name.
std::vector<Scan> read_scans(const std::filesystem::path& root);

/// Quantise an intensity in [0, 1] to the 8-bit raster representation.
std::uint8_t quantize_intensity(float v);

}  // namespace stylesplit
