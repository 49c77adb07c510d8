#ifndef HYPODIFF_SMOOTHING_HPP
#define HYPODIFF_SMOOTHING_HPP

#include <cmath>
#include <vector>

#include "grid.hpp"

namespace hypodiff {

/// Sampled 1-D Gaussian weights at offsets -r..r (r = ceil(4 sigma / h)),
/// renormalized to unit discrete mass.
inline std::vector<double> gaussian_weights(double sigma, double h) {
  const auto radius = static_cast<long>(std::ceil(4.0 * sigma / h));
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (long k = -radius; k <= radius; ++k) {
    const double x = k * h;
    w[k + radius] = std::exp(-x * x / (2.0 * sigma * sigma));
    total += w[k + radius];
  }
  for (double &v : w) v /= total;
  return w;
}

/// Separable Gaussian convolution with zero extension outside the image.
/// sigma_x and sigma_y are in physical length units.
inline Image2D gaussian_convolve(const Image2D &img, double sigma_x, double sigma_y) {
  if (!(sigma_x > 0.0) || !(sigma_y > 0.0))
    throw InvalidInput("gaussian_convolve: sigma must be positive");
  const std::size_t w = img.width(), h = img.height();
  const auto wx = gaussian_weights(sigma_x, img.spacing().hx);
  const auto wy = gaussian_weights(sigma_y, img.spacing().hy);
  const long rx = static_cast<long>(wx.size() / 2), ry = static_cast<long>(wy.size() / 2);

  Image2D tmp(w, h, img.spacing());
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (long k = -rx; k <= rx; ++k) {
        const long ii = static_cast<long>(i) - k;
        if (ii >= 0 && ii < static_cast<long>(w)) acc += wx[k + rx] * img(ii, j);
      }
      tmp(i, j) = acc;
    }

  Image2D out(w, h, img.spacing());
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (long k = -ry; k <= ry; ++k) {
        const long jj = static_cast<long>(j) - k;
        if (jj >= 0 && jj < static_cast<long>(h)) acc += wy[k + ry] * tmp(i, jj);
      }
      out(i, j) = acc;
    }
  return out;
}

inline Image2D gaussian_convolve(const Image2D &img, double sigma) {
  return gaussian_convolve(img, sigma, sigma);
}

} // namespace hypodiff

#endif
