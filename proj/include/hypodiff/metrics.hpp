#ifndef HYPODIFF_METRICS_HPP
#define HYPODIFF_METRICS_HPP

#include <cmath>
#include <limits>
#include <optional>

#include "corruption.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace hypodiff {

/// 10 log10(1 / MSE) for intensities in [0, 1], restricted to the masked
/// pixels when a mask is given. Identical inputs give +infinity.
inline double psnr(const Image2D &a, const Image2D &b, const Mask *mask = nullptr) {
  if (!a.same_shape(b)) throw InvalidInput("psnr: images differ in size");
  if (mask && !mask->matches(a)) throw InvalidInput("psnr: mask differs in size");
  double se = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask && !mask->data[i]) continue;
    const double d = a.data()[i] - b.data()[i];
    se += d * d;
    ++n;
  }
  if (n == 0) throw InvalidInput("psnr: empty region");
  const double mse = se / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

inline double psnr(const Image2D &a, const Image2D &b, const Mask &mask) { return psnr(a, b, &mask); }

} // namespace hypodiff

#endif
