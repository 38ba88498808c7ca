#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fvmd {

// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c) {}

  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// Decodes PNG, PPM (P6) or PGM (P5) by sniffing the file's magic bytes.
// Alpha channels are dropped; 16-bit inputs are rejected for PNM and
// downconverted for PNG.
Image decode_image(const std::filesystem::path& path);

// Encoders used by the synthetic generator and the tests. Format follows the
// file extension: .png, .ppm (3-channel) or .pgm (1-channel).
void encode_image(const Image& img, const std::filesystem::path& path);

// Bilinear resize with half-pixel centers. A same-size call returns the
// input unchanged so preprocessing is byte-stable on already-sized frames.
Image resize_bilinear(const Image& img, int out_w, int out_h);

// Integer-rounded Rec.601 luma for 3-channel input; pass-through for gray.
Image to_gray(const Image& img);

}  // namespace fvmd
