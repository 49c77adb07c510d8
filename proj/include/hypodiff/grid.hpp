#ifndef HYPODIFF_GRID_HPP
#define HYPODIFF_GRID_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"

namespace hypodiff {

using Complex = std::complex<double>;

/// Physical pixel spacing (length units per pixel).
struct Spacing {
  double hx = 1.0;
  double hy = 1.0;

  bool operator==(const Spacing &) const = default;
};

/// Real intensities on a width x height grid, row-major (x fastest).
class Image2D {
public:
  Image2D() = default;

  Image2D(std::size_t width, std::size_t height, Spacing spacing = {}, double fill = 0.0)
      : width_(width), height_(height), spacing_(spacing), data_(width * height, fill) {
    check_invariants();
  }

  Image2D(std::size_t width, std::size_t height, Spacing spacing, std::vector<double> data)
      : width_(width), height_(height), spacing_(spacing), data_(std::move(data)) {
    check_invariants();
  }

  /// Samples fn(x, y) at pixel centers x = i*hx + x0, y = j*hy + y0.
  template <class Fn>
  static Image2D sample(std::size_t width, std::size_t height, Spacing spacing, double x0,
                        double y0, Fn &&fn) {
    Image2D img(width, height, spacing);
    for (std::size_t j = 0; j < height; ++j)
      for (std::size_t i = 0; i < width; ++i)
        img(i, j) = fn(x0 + i * spacing.hx, y0 + j * spacing.hy);
    img.check_invariants();
    return img;
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  Spacing spacing() const noexcept { return spacing_; }

  double &operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
  double max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

  bool same_shape(const Image2D &other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  void check_invariants() const {
    if (width_ * height_ != data_.size())
      throw InvalidInput("Image2D: data length does not match width*height");
    if (!(spacing_.hx > 0.0) || !(spacing_.hy > 0.0))
      throw InvalidInput("Image2D: spacing must be strictly positive");
    for (double v : data_)
      if (!std::isfinite(v)) throw InvalidInput("Image2D: non-finite intensity");
  }

  bool operator==(const Image2D &) const = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  Spacing spacing_{};
  std::vector<double> data_;
};

/// Complex values per frequency bin. Bin (k, l) holds frequency
/// (xi1, xi2) = (k', l') / (n * h) with k' the wrap-around signed index.
class ComplexPlane {
public:
  ComplexPlane() = default;
  ComplexPlane(std::size_t width, std::size_t height, Spacing spacing)
      : width_(width), height_(height), spacing_(spacing), data_(width * height) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  Spacing spacing() const noexcept { return spacing_; }

  Complex &operator()(std::size_t k, std::size_t l) { return data_[l * width_ + k]; }
  const Complex &operator()(std::size_t k, std::size_t l) const { return data_[l * width_ + k]; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  Spacing spacing_{};
  std::vector<Complex> data_;
};

/// Signed wrap-around index of DFT bin k out of n.
inline long signed_bin(std::size_t k, std::size_t n) noexcept {
  return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

/// Physical frequency (cycles per unit length) of DFT bin k for n samples at spacing h.
inline double frequency(std::size_t k, std::size_t n, double h) noexcept {
  return static_cast<double>(signed_bin(k, n)) / (static_cast<double>(n) * h);
}

/// Uniform half-open grid over [0, period) with n_theta nodes.
class AngleGrid {
public:
  AngleGrid(std::size_t n_theta, double period) : n_(n_theta), period_(period) {
    if (n_theta < 4) throw InvalidInput("AngleGrid: n_theta must be >= 4");
    if (!is_pi(period) && !is_two_pi(period))
      throw InvalidInput("AngleGrid: period must be pi or 2*pi");
  }

  std::size_t size() const noexcept { return n_; }
  double period() const noexcept { return period_; }
  double step() const noexcept { return period_ / static_cast<double>(n_); }
  double node(std::size_t k) const noexcept { return static_cast<double>(k) * step(); }
  bool is_projective() const noexcept { return is_pi(period_); }

  bool operator==(const AngleGrid &) const = default;

  static bool is_pi(double p) noexcept { return std::abs(p - std::numbers::pi) < 1e-12; }
  static bool is_two_pi(double p) noexcept { return std::abs(p - 2.0 * std::numbers::pi) < 1e-12; }

private:
  std::size_t n_;
  double period_;
};

/// Reduces an angle into [0, period).
inline double wrap_angle(double theta, double period) noexcept {
  double r = std::fmod(theta, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

/// Real value per (x, y, theta) node; theta varies fastest, then x, then y.
class LiftedField {
public:
  LiftedField(std::size_t width, std::size_t height, Spacing spacing, AngleGrid angles,
              double fill = 0.0)
      : width_(width), height_(height), spacing_(spacing), angles_(angles),
        data_(width * height * angles.size(), fill) {
    if (!(spacing.hx > 0.0) || !(spacing.hy > 0.0))
      throw InvalidInput("LiftedField: spacing must be strictly positive");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t n_theta() const noexcept { return angles_.size(); }
  Spacing spacing() const noexcept { return spacing_; }
  const AngleGrid &angles() const noexcept { return angles_; }

  double &operator()(std::size_t x, std::size_t y, std::size_t k) {
    return data_[(y * width_ + x) * angles_.size() + k];
  }
  double operator()(std::size_t x, std::size_t y, std::size_t k) const {
    return data_[(y * width_ + x) * angles_.size() + k];
  }

  /// Theta profile ("fiber") over pixel (x, y).
  std::span<double> fiber(std::size_t x, std::size_t y) {
    return {data_.data() + (y * width_ + x) * angles_.size(), angles_.size()};
  }
  std::span<const double> fiber(std::size_t x, std::size_t y) const {
    return {data_.data() + (y * width_ + x) * angles_.size(), angles_.size()};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double sum() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

private:
  std::size_t width_;
  std::size_t height_;
  Spacing spacing_;
  AngleGrid angles_;
  std::vector<double> data_;
};

/// Two layers of a planar vector field.
struct VectorField {
  Image2D dx;
  Image2D dy;
};

/// Second derivatives on the pixel grid.
struct HessianField {
  Image2D dxx;
  Image2D dxy;
  Image2D dyy;
};

namespace detail {

// Derivative along one axis: central in the interior, one-sided
// second-order at both ends.
inline void derivative_1d(std::span<const double> in, std::size_t stride, std::size_t n,
                          double h, std::span<double> out) {
  const auto f = [&](std::size_t i) { return in[i * stride]; };
  out[0] = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i * stride] = (f(i + 1) - f(i - 1)) / (2.0 * h);
  out[(n - 1) * stride] = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
}

inline void second_derivative_1d(std::span<const double> in, std::size_t stride, std::size_t n,
                                 double h, std::span<double> out) {
  const auto f = [&](std::size_t i) { return in[i * stride]; };
  const double h2 = h * h;
  if (n >= 4) {
    out[0] = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2;
    out[(n - 1) * stride] = (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2;
  } else {
    out[0] = (f(0) - 2.0 * f(1) + f(2)) / h2;
    out[(n - 1) * stride] = (f(n - 1) - 2.0 * f(n - 2) + f(n - 3)) / h2;
  }
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i * stride] = (f(i + 1) - 2.0 * f(i) + f(i - 1)) / h2;
}

inline Image2D derivative_x(const Image2D &img) {
  Image2D out(img.width(), img.height(), img.spacing());
  for (std::size_t j = 0; j < img.height(); ++j)
    derivative_1d(img.data().subspan(j * img.width()), 1, img.width(), img.spacing().hx,
                  out.data().subspan(j * img.width()));
  return out;
}

inline Image2D derivative_y(const Image2D &img) {
  Image2D out(img.width(), img.height(), img.spacing());
  for (std::size_t i = 0; i < img.width(); ++i)
    derivative_1d(img.data().subspan(i), img.width(), img.height(), img.spacing().hy,
                  out.data().subspan(i));
  return out;
}

} // namespace detail

/// Discrete gradient scaled by the pixel spacing.
inline VectorField gradient(const Image2D &img) {
  if (img.width() < 3 || img.height() < 3)
    throw InvalidInput("gradient: image must be at least 3x3");
  return {detail::derivative_x(img), detail::derivative_y(img)};
}

/// Discrete Hessian. The mixed term differentiates the x-derivative along y.
inline HessianField hessian(const Image2D &img) {
  if (img.width() < 3 || img.height() < 3)
    throw InvalidInput("hessian: image must be at least 3x3");
  Image2D dxx(img.width(), img.height(), img.spacing());
  Image2D dyy(img.width(), img.height(), img.spacing());
  for (std::size_t j = 0; j < img.height(); ++j)
    detail::second_derivative_1d(img.data().subspan(j * img.width()), 1, img.width(),
                                 img.spacing().hx, dxx.data().subspan(j * img.width()));
  for (std::size_t i = 0; i < img.width(); ++i)
    detail::second_derivative_1d(img.data().subspan(i), img.width(), img.height(),
                                 img.spacing().hy, dyy.data().subspan(i));
  Image2D dxy = detail::derivative_y(detail::derivative_x(img));
  return {std::move(dxx), std::move(dxy), std::move(dyy)};
}

} // namespace hypodiff

#endif
