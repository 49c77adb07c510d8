#ifndef HYPODIFF_IMAGE_IO_HPP
#define HYPODIFF_IMAGE_IO_HPP

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace hypodiff {

enum class ImageFormat { pgm_ascii, pgm_binary, png };

namespace detail {

inline std::vector<std::uint8_t> read_bytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

class PgmReader {
public:
  explicit PgmReader(const std::vector<std::uint8_t> &b) : b_(b) {}

  Image2D read() {
    if (b_.size() < 2 || b_[0] != 'P' || (b_[1] != '2' && b_[1] != '5'))
      throw FormatError("pgm: expected magic P2 or P5", 0);
    const bool binary = b_[1] == '5';
    pos_ = 2;
    const std::size_t w = number("width"), h = number("height");
    skip_space();
    const std::size_t maxval_at = pos_;
    const std::size_t maxval = number("maxval");
    if (w == 0 || h == 0) throw FormatError("pgm: zero image dimension", maxval_at);
    if (maxval == 0 || maxval > 65535) throw FormatError("pgm: unsupported maxval", maxval_at);
    Image2D img(w, h);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (binary) {
      if (pos_ >= b_.size() || !std::isspace(b_[pos_]))
        throw FormatError("pgm: missing whitespace before raster", pos_);
      ++pos_;
      const std::size_t bpp = maxval > 255 ? 2 : 1;
      if (b_.size() - pos_ < w * h * bpp) throw FormatError("pgm: truncated raster", b_.size());
      for (std::size_t i = 0; i < w * h; ++i) {
        std::size_t v = b_[pos_ + i * bpp];
        if (bpp == 2) v = (v << 8) | b_[pos_ + i * bpp + 1];
        if (v > maxval) throw FormatError("pgm: sample exceeds maxval", pos_ + i * bpp);
        img.data()[i] = static_cast<double>(v) * scale;
      }
    } else {
      for (std::size_t i = 0; i < w * h; ++i) {
        skip_space();
        const std::size_t at = pos_;
        const std::size_t v = number("sample");
        if (v > maxval) throw FormatError("pgm: sample exceeds maxval", at);
        img.data()[i] = static_cast<double>(v) * scale;
      }
    }
    return img;
  }

private:
  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char *what) {
    skip_space();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_]))
      throw FormatError(std::string("pgm: expected ") + what, pos_);
    std::size_t v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > (1u << 30)) throw FormatError(std::string("pgm: ") + what + " out of range", pos_);
      ++pos_;
    }
    return v;
  }

  const std::vector<std::uint8_t> &b_;
  std::size_t pos_ = 0;
};

struct PngSource {
  const std::vector<std::uint8_t> *bytes;
  std::size_t pos;
  std::size_t error_at;
  char message[256];
};

inline void png_fail(png_structp png, png_const_charp msg) {
  auto *src = static_cast<PngSource *>(png_get_error_ptr(png));
  if (src->error_at == std::size_t(-1)) src->error_at = src->pos;
  std::snprintf(src->message, sizeof src->message, "%s", msg);
  png_longjmp(png, 1);
}

inline void png_warn(png_structp, png_const_charp) {}

inline void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto *src = static_cast<PngSource *>(png_get_io_ptr(png));
  if (src->bytes->size() - src->pos < n) {
    src->error_at = src->bytes->size();
    png_error(png, "truncated file");
  }
  std::memcpy(out, src->bytes->data() + src->pos, n);
  src->pos += n;
}

// All storage touched after setjmp is allocated before it, so a longjmp out
// of libpng skips no destructors.
inline Image2D read_png(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw FormatError("png: bad signature", 0);
  PngSource src{&bytes, 0, std::size_t(-1), {}};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &src, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw FormatError("png: decoder allocation failed", 0);
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int depth = 0, color = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(std::string("png: ") + src.message, src.error_at);
  }
  png_set_read_fn(png, &src, png_read_fn);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);
  // IHDR fields sit at fixed offsets: bit depth at byte 24, colour type at 25.
  if (depth != 8 || color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    if (depth != 8) throw FormatError("png: unsupported bit depth " + std::to_string(depth), 24);
    throw FormatError("png: only 8-bit grayscale is supported", 25);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  raster.resize(static_cast<std::size_t>(w) * h);
  rows.resize(h);
  for (std::size_t j = 0; j < h; ++j) rows[j] = raster.data() + j * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image2D img(w, h);
  for (std::size_t i = 0; i < raster.size(); ++i) img.data()[i] = raster[i] / 255.0;
  return img;
}

inline void write_png(const Image2D &img, const std::string &path) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(img.width());
  desc.height = static_cast<png_uint_32>(img.height());
  desc.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raster(img.size());
  for (std::size_t i = 0; i < raster.size(); ++i) raster[i] = quantize(img.data()[i]);
  if (!png_image_write_to_file(&desc, path.c_str(), 0, raster.data(), 0, nullptr))
    throw InvalidInput("png: cannot write " + path + ": " + desc.message);
}

inline bool has_png_extension(const std::string &path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

} // namespace detail

/// Decodes PGM (P2, P5) or 8-bit grayscale PNG bytes into [0, 1] intensities.
inline Image2D decode_image(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return detail::read_png(bytes);
  return detail::PgmReader(bytes).read();
}

inline Image2D load_image(const std::string &path) {
  return decode_image(detail::read_bytes(path));
}

/// Quantizes to 8 bits with rounding after clamping to [0, 1].
inline void save_image(const Image2D &img, const std::string &path, ImageFormat fmt) {
  if (fmt == ImageFormat::png) return detail::write_png(img, path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << (fmt == ImageFormat::pgm_binary ? "P5" : "P2") << '\n'
      << img.width() << ' ' << img.height() << "\n255\n";
  if (fmt == ImageFormat::pgm_binary) {
    for (double v : img.data()) out.put(static_cast<char>(detail::quantize(v)));
  } else {
    for (std::size_t j = 0; j < img.height(); ++j) {
      for (std::size_t i = 0; i < img.width(); ++i)
        out << (i ? " " : "") << static_cast<int>(detail::quantize(img(i, j)));
      out << '\n';
    }
  }
  if (!out) throw InvalidInput("write failed: " + path);
}

/// Format chosen by extension: .png writes PNG, anything else binary PGM.
inline void save_image(const Image2D &img, const std::string &path) {
  save_image(img, path, detail::has_png_extension(path) ? ImageFormat::png : ImageFormat::pgm_binary);
}

} // namespace hypodiff

#endif
