#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace qmrf {

/// Grayscale image with values in [0, 1]; i is the column, j the row.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0);

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(j) * width + i]; }
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(j) * width + i]; }
};

/// Per-pixel disparity in full-resolution pixel units plus a valid mask.
struct DisparityMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  DisparityMap() = default;
  DisparityMap(int w, int h, double fill = 0.0);

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * width + i; }
  double operator()(int i, int j) const { return values[index(i, j)]; }
  double& operator()(int i, int j) { return values[index(i, j)]; }
  bool is_valid(int i, int j) const { return valid[index(i, j)] != 0; }
};

/// Raw samples of a PGM or PPM file.
struct PnmRaster {
  int width = 0;
  int height = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

/// Parses P2, P3, P5 or P6 data with maxval up to 65535. Throws ParseError.
PnmRaster parse_pnm(std::string_view bytes);
PnmRaster read_pnm(const std::filesystem::path& path);
void write_pnm(const PnmRaster& raster, const std::filesystem::path& path);

/// Colour rasters are converted with Rec. 601 luma weights.
GrayImage to_gray(const PnmRaster& raster);
GrayImage load_image(const std::filesystem::path& path);

/// Writes a 16-bit binary PGM of round(value * 65535).
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Writes round(value * scale) clamped to [0, 65535]; invalid pixels as 0.
/// The file is 8-bit when every sample fits, 16-bit otherwise.
void save_pgm(const DisparityMap& map, const std::filesystem::path& path, double scale = 8.0);

/// Ground-truth style map: sample / scale, with 0 marking an invalid pixel.
DisparityMap load_disparity(const std::filesystem::path& path, double scale = 8.0);

/// Float sidecar layout: the 8 bytes "QMRFDSP1", uint32 width and height,
/// then width*height float32 values in row-major order; all little-endian.
/// NaN marks an invalid pixel.
void save_disparity_float(const DisparityMap& map, const std::filesystem::path& path);
DisparityMap load_disparity_float(const std::filesystem::path& path);

/// Area-averaging downsample by factor in {1, 1/2, ..., 1/32}; output size is
/// ceil(size * factor) and border blocks average only the pixels they cover.
GrayImage resize_area(const GrayImage& img, double factor);

/// Nearest-neighbour upsample of a level map by an integer ratio, cropped to
/// width x height. Values are copied unchanged.
DisparityMap upsample_nearest(const DisparityMap& map, int ratio, int width, int height);

/// Lower median over the valid pixels of a window x window neighbourhood with
/// replicated borders. Invalid pixels stay invalid.
DisparityMap median_filter(const DisparityMap& map, int window);

/// Gaussian bilateral filter over the disc of radius diameter / 2, replicated
/// borders, invalid pixels neither contribute nor change.
DisparityMap bilateral_filter(const DisparityMap& map, int diameter, double sigma_color, double sigma_space);

}  // namespace qmrf
