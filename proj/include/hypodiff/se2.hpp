#ifndef HYPODIFF_SE2_HPP
#define HYPODIFF_SE2_HPP

#include <cmath>
#include <numbers>

namespace hypodiff {

/// Rototranslation (x, y, theta): rotate by theta, then translate by (x, y).
struct Se2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  static Se2 identity() noexcept { return {}; }
  /// The element (0, 0, pi) that identifies the two SE(2) preimages of a PT R^2 point.
  static Se2 half_turn() noexcept { return {0.0, 0.0, std::numbers::pi}; }

  Se2 operator*(const Se2 &o) const noexcept {
    const double c = std::cos(theta), s = std::sin(theta);
    return {x + c * o.x - s * o.y, y + s * o.x + c * o.y, theta + o.theta};
  }

  Se2 inverse() const noexcept {
    const double c = std::cos(theta), s = std::sin(theta);
    return {-(c * x + s * y), -(-s * x + c * y), -theta};
  }
};

} // namespace hypodiff

#endif
