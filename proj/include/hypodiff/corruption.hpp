#ifndef HYPODIFF_CORRUPTION_HPP
#define HYPODIFF_CORRUPTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace hypodiff {

/// Boolean layer over an image; true marks a corrupted (unknown) pixel.
struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(std::size_t w, std::size_t h) : width(w), height(h), data(w * h, 0) {}

  bool operator()(std::size_t x, std::size_t y) const { return data[y * width + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v = true) { data[y * width + x] = v; }

  std::size_t count() const { return static_cast<std::size_t>(std::count(data.begin(), data.end(), 1)); }
  double fraction() const { return data.empty() ? 0.0 : static_cast<double>(count()) / data.size(); }
  bool matches(const Image2D &img) const { return width == img.width() && height == img.height(); }
  bool operator==(const Mask &) const = default;

  /// Nonzero pixels of an image mark corrupted pixels.
  static Mask from_image(const Image2D &img) {
    Mask m(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) m.data[i] = img.data()[i] > 0.5;
    return m;
  }
  Image2D to_image() const {
    Image2D img(width, height);
    for (std::size_t i = 0; i < data.size(); ++i) img.data()[i] = data[i] ? 1.0 : 0.0;
    return img;
  }
};

enum class MaskKind { stripes, grid, diagonal, random_blocks };

inline const char *to_string(MaskKind k) noexcept {
  switch (k) {
  case MaskKind::stripes: return "stripes";
  case MaskKind::grid: return "grid";
  case MaskKind::diagonal: return "diagonal";
  case MaskKind::random_blocks: return "random_blocks";
  }
  return "unknown";
}

inline MaskKind parse_mask_kind(const std::string &s) {
  if (s == "stripes") return MaskKind::stripes;
  if (s == "grid") return MaskKind::grid;
  if (s == "diagonal") return MaskKind::diagonal;
  if (s == "random_blocks" || s == "random-blocks") return MaskKind::random_blocks;
  throw InvalidInput("unknown mask kind '" + s + "'");
}

struct MaskSpec {
  MaskKind kind = MaskKind::stripes;
  double coverage = 0.1;        ///< target fraction of corrupted pixels, in (0, 1)
  std::size_t thickness = 2;    ///< stripe width or block side, pixels
  bool vertical = false;        ///< stripes run along columns instead of rows

  void validate() const {
    if (!(coverage > 0.0 && coverage < 1.0)) throw InvalidInput("MaskSpec: coverage must lie in (0, 1)");
    if (thickness == 0) throw InvalidInput("MaskSpec: thickness must be positive");
  }
};

namespace detail {

// Marks `count` of `n` lines in bands of `thickness`, evenly spaced from a
// seeded offset.
inline std::vector<std::uint8_t> striped_lines(std::size_t n, std::size_t count,
                                               std::size_t thickness, std::mt19937_64 &rng) {
  std::vector<std::uint8_t> lines(n, 0);
  if (count == 0) return lines;
  const std::size_t bands = (count + thickness - 1) / thickness;
  const double pitch = static_cast<double>(n) / static_cast<double>(bands);
  const auto slack = static_cast<std::size_t>(std::max(0.0, std::floor(pitch) - thickness));
  const std::size_t offset = slack > 0 ? std::uniform_int_distribution<std::size_t>(0, slack)(rng) : 0;
  std::size_t left = count;
  for (std::size_t b = 0; b < bands && left > 0; ++b) {
    const auto start = offset + static_cast<std::size_t>(std::floor(b * pitch));
    for (std::size_t k = 0; k < thickness && left > 0; ++k) {
      const std::size_t i = (start + k) % n;
      if (!lines[i]) {
        lines[i] = 1;
        --left;
      }
    }
  }
  for (std::size_t i = 0; left > 0 && i < n; ++i)
    if (!lines[i]) {
      lines[i] = 1;
      --left;
    }
  return lines;
}

} // namespace detail

/// Builds the corruption mask described by `spec` for a width x height image.
inline Mask make_mask(std::size_t width, std::size_t height, const MaskSpec &spec,
                      std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  Mask m(width, height);
  switch (spec.kind) {
  case MaskKind::stripes: {
    const std::size_t n = spec.vertical ? width : height;
    const auto count = static_cast<std::size_t>(std::lround(spec.coverage * n));
    const auto lines = detail::striped_lines(n, count, spec.thickness, rng);
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) m.set(x, y, lines[spec.vertical ? x : y]);
    break;
  }
  case MaskKind::grid: {
    const double per_axis = 1.0 - std::sqrt(1.0 - spec.coverage);
    const auto rows = detail::striped_lines(
        height, static_cast<std::size_t>(std::lround(per_axis * height)), spec.thickness, rng);
    const auto cols = detail::striped_lines(
        width, static_cast<std::size_t>(std::lround(per_axis * width)), spec.thickness, rng);
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) m.set(x, y, rows[y] || cols[x]);
    break;
  }
  case MaskKind::diagonal: {
    // Band around the main diagonal; the narrowest band reaching the target
    // coverage.
    std::vector<double> dist(width * height);
    const double sx = width > 1 ? 1.0 / (width - 1.0) : 0.0, sy = height > 1 ? 1.0 / (height - 1.0) : 0.0;
    const double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x)
        dist[y * width + x] = std::abs(x * sx - y * sy) * width * height / diag;
    std::vector<double> sorted = dist;
    const auto target = static_cast<std::size_t>(std::lround(spec.coverage * sorted.size()));
    if (target == 0) break;
    std::nth_element(sorted.begin(), sorted.begin() + (target - 1), sorted.end());
    const double cut = sorted[target - 1];
    for (std::size_t i = 0; i < dist.size(); ++i) m.data[i] = dist[i] <= cut;
    break;
  }
  case MaskKind::random_blocks: {
    const std::size_t side = std::min({spec.thickness, width, height});
    const auto target = static_cast<std::size_t>(std::lround(spec.coverage * width * height));
    std::uniform_int_distribution<std::size_t> ux(0, width - side), uy(0, height - side);
    std::size_t covered = 0;
    for (std::size_t guard = 0; covered < target && guard < 100 * width * height; ++guard) {
      const std::size_t x0 = ux(rng), y0 = uy(rng);
      for (std::size_t y = y0; y < y0 + side; ++y)
        for (std::size_t x = x0; x < x0 + side; ++x)
          if (!m(x, y) && covered < target) {
            m.set(x, y);
            ++covered;
          }
    }
    break;
  }
  }
  return m;
}

struct Corruption {
  Image2D image;
  Mask mask;
};

/// Zeroes the masked pixels of `img`.
inline Image2D apply_mask(const Image2D &img, const Mask &mask) {
  if (!mask.matches(img)) throw InvalidInput("apply_mask: mask and image differ in size");
  Image2D out = img;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask.data[i]) out.data()[i] = 0.0;
  return out;
}

inline Corruption corrupt_image(const Image2D &img, const MaskSpec &spec, std::uint64_t seed) {
  Mask m = make_mask(img.width(), img.height(), spec, seed);
  return {apply_mask(img, m), std::move(m)};
}

} // namespace hypodiff

#endif
