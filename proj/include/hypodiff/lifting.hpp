#ifndef HYPODIFF_LIFTING_HPP
#define HYPODIFF_LIFTING_HPP

#include <cmath>
#include <numbers>
#include <optional>

#include "grid.hpp"

namespace hypodiff {

struct LiftParams {
  double epsilon = std::numbers::pi / 32.0; ///< angular half-width of the window
  std::size_t n_theta = 32;
  double period = std::numbers::pi;
  /// Gradients at or below this norm count as zero. Negative selects
  /// 1e-3 * max |grad f| over the image.
  double zero_grad_tol = -1.0;

  AngleGrid angle_grid() const { return AngleGrid(n_theta, period); }

  void validate() const {
    const AngleGrid grid = angle_grid();
    if (!(epsilon > 0.0) || !(epsilon < period / 2.0))
      throw InvalidInput("LiftParams: epsilon must lie in (0, period/2)");
    if (epsilon < grid.step() * (1.0 - 1e-12))
      throw InvalidInput("LiftParams: epsilon must cover at least one theta bin");
  }

  /// One-bin window: epsilon equal to the angular step.
  static LiftParams one_bin(std::size_t n_theta, double period = std::numbers::pi) {
    return {period / static_cast<double>(n_theta), n_theta, period, -1.0};
  }
};

/// Direction of the level set through a point with gradient (gx, gy):
/// arg(g) - pi/2 reduced into [0, period). Empty when |g| <= tol.
inline std::optional<double> level_direction(double gx, double gy, double period,
                                             double tol = 0.0) {
  if (!(std::hypot(gx, gy) > tol)) return std::nullopt;
  return wrap_angle(std::atan2(gy, gx) - std::numbers::pi / 2.0, period);
}

/// Signed distance from a to b on the circle of the given period, in [-period/2, period/2).
inline double angular_offset(double a, double b, double period) noexcept {
  double d = wrap_angle(b - a + period / 2.0, period) - period / 2.0;
  return d;
}

namespace detail {

inline double resolve_zero_grad_tol(const VectorField &g, double requested) {
  if (requested >= 0.0) return requested;
  double mx = 0.0;
  for (std::size_t i = 0; i < g.dx.size(); ++i)
    mx = std::max(mx, std::hypot(g.dx.data()[i], g.dy.data()[i]));
  return 1e-3 * mx;
}

} // namespace detail

/// Lifts f to (x, y, theta). Where the gradient is non-zero the value f/(2 eps)
/// is placed on the bins whose node lies in [dir - eps, dir + eps) around the
/// level direction; elsewhere f/(2 eps) fills the whole fiber.
///
/// The orientation of each fiber is read from `geometry` (a gradient field
/// of the same shape as f), so several images can share one lift geometry.
inline LiftedField lift_image(const Image2D &f, const VectorField &g, const LiftParams &p) {
  p.validate();
  if (g.dx.width() != f.width() || g.dx.height() != f.height())
    throw InvalidInput("lift_image: gradient field differs in size from the image");
  const AngleGrid grid = p.angle_grid();
  const double tol = detail::resolve_zero_grad_tol(g, p.zero_grad_tol);
  const double scale = 1.0 / (2.0 * p.epsilon);
  // Guard against the half-open bound flipping under rounding.
  const double slack = 1e-12 * grid.period();

  LiftedField out(f.width(), f.height(), f.spacing(), grid);
#pragma omp parallel for schedule(static)
  for (long jj = 0; jj < static_cast<long>(f.height()); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    for (std::size_t i = 0; i < f.width(); ++i) {
      const double value = f(i, j) * scale;
      auto fiber = out.fiber(i, j);
      const auto dir = level_direction(g.dx(i, j), g.dy(i, j), grid.period(), tol);
      if (!dir) {
        std::fill(fiber.begin(), fiber.end(), value);
        continue;
      }
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = angular_offset(*dir, grid.node(k), grid.period());
        if (d >= -p.epsilon - slack && d < p.epsilon - slack) fiber[k] = value;
      }
    }
  }
  return out;
}

inline LiftedField lift_image(const Image2D &f, const LiftParams &p) {
  return lift_image(f, gradient(f), p);
}

/// Point of the plane with a fiber angle.
struct LiftedPoint {
  std::size_t x = 0;
  std::size_t y = 0;
  double theta = 0.0;
};

/// Numerical rank (0 or 1) of the differential of
/// g(x, y, theta) = cos(theta) f_x + sin(theta) f_y at a point where g = 0.
/// Rank 1 everywhere on the zero set certifies it is a smooth surface.
inline int lifted_support_rank(const Image2D &f, LiftedPoint pt, double support_tol = -1.0,
                               double rank_tol = -1.0) {
  if (pt.x >= f.width() || pt.y >= f.height())
    throw InvalidInput("lifted_support_rank: point outside the image");
  const VectorField g = gradient(f);
  const HessianField h = hessian(f);
  double gmax = 0.0, hmax = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    gmax = std::max(gmax, std::hypot(g.dx.data()[i], g.dy.data()[i]));
    hmax = std::max({hmax, std::abs(h.dxx.data()[i]), std::abs(h.dxy.data()[i]),
                     std::abs(h.dyy.data()[i])});
  }
  const double scale = std::max(gmax, hmax);
  if (support_tol < 0.0) support_tol = 1e-9 * std::max(scale, 1e-300);
  if (rank_tol < 0.0) rank_tol = 1e-6 * std::max(scale, 1e-300);

  const double c = std::cos(pt.theta), s = std::sin(pt.theta);
  const double fx = g.dx(pt.x, pt.y), fy = g.dy(pt.x, pt.y);
  if (std::abs(c * fx + s * fy) > support_tol)
    throw InvalidInput("lifted_support_rank: point is not on the lifted support");
  const double dgx = c * h.dxx(pt.x, pt.y) + s * h.dxy(pt.x, pt.y);
  const double dgy = c * h.dxy(pt.x, pt.y) + s * h.dyy(pt.x, pt.y);
  const double dgt = -s * fx + c * fy;
  return std::sqrt(dgx * dgx + dgy * dgy + dgt * dgt) > rank_tol ? 1 : 0;
}

} // namespace hypodiff

#endif
