#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pamm/features.hpp"

namespace pamm {

// 8-bit image, row-major, interleaved channels (1 or 3).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  bool empty() const noexcept { return width <= 0 || height <= 0 || data.empty(); }
};

inline constexpr int kPatchHeight = 128;
inline constexpr int kPatchWidth = 48;
inline constexpr int kBlockRows = 6;
inline constexpr int kBlockCols = 2;
inline constexpr int kColorBins = 8;
inline constexpr int kOrientationBins = 9;
inline constexpr int kBlockLength = 3 * kColorBins + kOrientationBins;
inline constexpr int kBuiltinDescriptorLength = kBlockRows * kBlockCols * kBlockLength;
inline constexpr const char* kBuiltinDescriptorId = "builtin-color-orientation-v1";

// Bilinear resampling with pixel-centre alignment.
Image resize_bilinear(const Image& image, int width, int height);

// Per block of a 6x2 grid over the 128x48 resized patch: an 8-bin histogram per
// colour channel followed by a 9-bin histogram of edge orientation in [0, 180)
// (perpendicular to the gradient, so a vertical edge lands in the 90 degree
// bin) weighted by gradient magnitude. Colour and orientation parts are each
// L2-normalised within the block. Throws EmptyPatch.
FeatureVector extract_builtin_descriptor(const Image& patch);

// Binary PPM (P6) / PGM (P5), and PNG when built with libpng.
Image load_image(const std::string& path);
void save_ppm(const std::string& path, const Image& image);

}  // namespace pamm
