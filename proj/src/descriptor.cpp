#include "pamm/descriptor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#ifdef PAMM_HAVE_PNG
#include <png.h>
#endif

#include "pamm/error.hpp"

namespace pamm {
namespace {

constexpr double kNormEpsilon = 1e-12;

void l2_normalize(Eigen::Ref<Eigen::VectorXd> v) {
  const double n = v.norm();
  if (n > kNormEpsilon) v /= n;
}

int block_edge(int index, int cells, int extent) { return index * extent / cells; }

Image read_pnm(std::ifstream& in, const std::string& path) {
  std::string magic;
  in >> magic;
  if (magic != "P6" && magic != "P5") throw Error(ErrorCode::ParseError, path + ": unsupported PNM type " + magic);
  auto next_int = [&]() {
    int value = 0;
    while (true) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      if (!(in >> value)) throw Error(ErrorCode::ParseError, path + ": truncated PNM header");
      return value;
    }
  };
  Image img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (img.width <= 0 || img.height <= 0 || maxval != 255) {
    throw Error(ErrorCode::ParseError, path + ": only 8-bit PNM images are supported");
  }
  in.get();
  img.channels = magic == "P6" ? 3 : 1;
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!in) throw Error(ErrorCode::ParseError, path + ": truncated PNM pixel data");
  return img;
}

}  // namespace

Image resize_bilinear(const Image& image, int width, int height) {
  if (image.empty()) throw Error(ErrorCode::EmptyPatch, "cannot resize an empty image");
  Image out;
  out.width = width;
  out.height = height;
  out.channels = image.channels;
  out.data.resize(static_cast<std::size_t>(width) * height * image.channels);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double ax = fx - x0;
      for (int c = 0; c < image.channels; ++c) {
        const double top = (1.0 - ax) * image.at(x0, y0, c) + ax * image.at(x1, y0, c);
        const double bottom = (1.0 - ax) * image.at(x0, y1, c) + ax * image.at(x1, y1, c);
        const double v = (1.0 - ay) * top + ay * bottom;
        out.data[(static_cast<std::size_t>(y) * width + x) * image.channels + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

FeatureVector extract_builtin_descriptor(const Image& patch) {
  if (patch.empty()) throw Error(ErrorCode::EmptyPatch, "descriptor input patch is empty");
  if (patch.channels != 1 && patch.channels != 3) {
    throw Error(ErrorCode::InvalidArgument, "descriptor expects 1 or 3 channels");
  }
  const Image img = resize_bilinear(patch, kPatchWidth, kPatchHeight);
  const auto channel = [&](int x, int y, int c) -> double {
    return img.at(x, y, img.channels == 3 ? c : 0);
  };

  Eigen::MatrixXd gray(kPatchHeight, kPatchWidth);
  for (int y = 0; y < kPatchHeight; ++y) {
    for (int x = 0; x < kPatchWidth; ++x) {
      gray(y, x) = 0.299 * channel(x, y, 0) + 0.587 * channel(x, y, 1) + 0.114 * channel(x, y, 2);
    }
  }

  FeatureVector f{Eigen::VectorXd::Zero(kBuiltinDescriptorLength), kBuiltinDescriptorId};
  for (int by = 0; by < kBlockRows; ++by) {
    for (int bx = 0; bx < kBlockCols; ++bx) {
      const int offset = (by * kBlockCols + bx) * kBlockLength;
      auto block = f.values.segment(offset, kBlockLength);
      const int y_lo = block_edge(by, kBlockRows, kPatchHeight);
      const int y_hi = block_edge(by + 1, kBlockRows, kPatchHeight);
      const int x_lo = block_edge(bx, kBlockCols, kPatchWidth);
      const int x_hi = block_edge(bx + 1, kBlockCols, kPatchWidth);
      for (int y = y_lo; y < y_hi; ++y) {
        for (int x = x_lo; x < x_hi; ++x) {
          for (int c = 0; c < 3; ++c) {
            const int bin = std::min(kColorBins - 1, static_cast<int>(channel(x, y, c)) * kColorBins / 256);
            block[c * kColorBins + bin] += 1.0;
          }
          // Central differences, one-sided at the border.
          const int xl = std::max(x - 1, 0);
          const int xr = std::min(x + 1, kPatchWidth - 1);
          const int yu = std::max(y - 1, 0);
          const int yd = std::min(y + 1, kPatchHeight - 1);
          const double gx = (gray(y, xr) - gray(y, xl)) / (xr - xl);
          const double gy = (gray(yd, x) - gray(yu, x)) / (yd - yu);
          const double magnitude = std::hypot(gx, gy);
          if (magnitude == 0.0) continue;
          double edge = std::atan2(gy, gx) * 180.0 / std::numbers::pi + 90.0;
          edge = std::fmod(edge, 180.0);
          if (edge < 0.0) edge += 180.0;
          const int bin = std::min(kOrientationBins - 1, static_cast<int>(edge / (180.0 / kOrientationBins)));
          block[3 * kColorBins + bin] += magnitude;
        }
      }
      l2_normalize(block.head(3 * kColorBins));
      l2_normalize(block.tail(kOrientationBins));
    }
  }
  return f;
}

Image load_image(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".png") {
#ifdef PAMM_HAVE_PNG
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
      throw Error(ErrorCode::ParseError, path + ": " + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    Image img;
    img.width = static_cast<int>(png.width);
    img.height = static_cast<int>(png.height);
    img.channels = 3;
    img.data.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr)) {
      png_image_free(&png);
      throw Error(ErrorCode::ParseError, path + ": " + png.message);
    }
    return img;
#else
    throw Error(ErrorCode::ParseError, path + ": built without PNG support");
#endif
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open image " + path);
  return read_pnm(in, path);
}

void save_ppm(const std::string& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << (image.channels == 3 ? "P6" : "P5") << '\n' << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
}

}  // namespace pamm
