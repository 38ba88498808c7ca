#include "fvmd/image.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "fvmd/errors.hpp"

namespace fvmd {

namespace {

Image decode_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw DecodeError("cannot read PNG " + path.string() + ": " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image img(static_cast<int>(png.width), static_cast<int>(png.height),
            color ? 3 : 1);
  if (!png_image_finish_read(&png, nullptr, img.data.data(), 0, nullptr)) {
    png_image_free(&png);
    throw DecodeError("cannot decode PNG " + path.string() + ": " + png.message);
  }
  return img;
}

void encode_png(const Image& img, const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.data.data(),
                               0, nullptr)) {
    throw WriteError("cannot write PNG " + path.string() + ": " + png.message);
  }
}

int pnm_token(std::istream& in, const std::filesystem::path& path) {
  // Whitespace-separated decimal token; '#' starts a comment to end of line.
  int c = in.get();
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) {
    throw DecodeError("malformed PNM header in " + path.string());
  }
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1000000) throw DecodeError("PNM header overflow in " + path.string());
    c = in.get();
  }
  return static_cast<int>(v);
}

Image decode_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '6')) {
    throw DecodeError("unsupported PNM type in " + path.string());
  }
  const int channels = m1 == '6' ? 3 : 1;
  const int w = pnm_token(in, path);
  const int h = pnm_token(in, path);
  const int maxval = pnm_token(in, path);
  if (w <= 0 || h <= 0) throw DecodeError("bad PNM size in " + path.string());
  if (maxval != 255) {
    throw DecodeError("unsupported PNM maxval " + std::to_string(maxval) +
                      " in " + path.string());
  }
  // pnm_token already consumed the single whitespace byte before the raster.
  Image img(w, h, channels);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw DecodeError("truncated PNM raster in " + path.string());
  }
  return img;
}

void encode_pnm(const Image& img, const std::filesystem::path& path) {
  const bool color = path.extension() == ".ppm";
  if ((color && img.channels != 3) || (!color && img.channels != 1)) {
    throw WriteError("channel count does not match extension for " +
                     path.string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WriteError("cannot open " + path.string());
  out << (color ? "P6\n" : "P5\n") << img.width << ' ' << img.height
      << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw WriteError("cannot write " + path.string());
}

}  // namespace

Image decode_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DecodeError("cannot open " + path.string());
  unsigned char sig[8] = {0};
  probe.read(reinterpret_cast<char*>(sig), sizeof(sig));
  probe.close();
  if (png_sig_cmp(sig, 0, 8) == 0) return decode_png(path);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return decode_pnm(path);
  throw DecodeError("unrecognized image format in " + path.string());
}

void encode_image(const Image& img, const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".png") {
    encode_png(img, path);
  } else if (ext == ".ppm" || ext == ".pgm") {
    encode_pnm(img, path);
  } else {
    throw WriteError("unsupported output extension " + ext.string());
  }
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
  if (img.width == out_w && img.height == out_h) return img;
  Image out(out_w, out_h, img.channels);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  const int c = img.channels;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    if (fy < 0) fy = 0;
    if (fy > img.height - 1) fy = img.height - 1;
    const int y0 = static_cast<int>(fy);
    const int y1 = y0 + 1 < img.height ? y0 + 1 : y0;
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      if (fx < 0) fx = 0;
      if (fx > img.width - 1) fx = img.width - 1;
      const int x0 = static_cast<int>(fx);
      const int x1 = x0 + 1 < img.width ? x0 + 1 : x0;
      const double wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = img.at(x0, y0, ch) * (1.0 - wx) + img.at(x1, y0, ch) * wx;
        const double bot = img.at(x0, y1, ch) * (1.0 - wx) + img.at(x1, y1, ch) * wx;
        const double v = top * (1.0 - wy) + bot * wy;
        out.at(x, y, ch) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = img.data[i * 3 + 0];
    const double g = img.data[i * 3 + 1];
    const double b = img.data[i * 3 + 2];
    out.data[i] =
        static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
  }
  return out;
}

}  // namespace fvmd
