#ifndef HYPODIFF_MORSE_HPP
#define HYPODIFF_MORSE_HPP

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "grid.hpp"
#include "quadrature.hpp"
#include "smoothing.hpp"

namespace hypodiff {

enum class CriticalKind { minimum, maximum, saddle, degenerate };

inline const char *to_string(CriticalKind k) noexcept {
  switch (k) {
  case CriticalKind::minimum: return "minimum";
  case CriticalKind::maximum: return "maximum";
  case CriticalKind::saddle: return "saddle";
  case CriticalKind::degenerate: return "degenerate";
  }
  return "unknown";
}

struct CriticalPoint {
  double x = 0.0; ///< pixel coordinates, sub-pixel accurate
  double y = 0.0;
  CriticalKind kind = CriticalKind::degenerate;
  double hessian_det = 0.0;
  double gradient_norm = 0.0;
};

struct MorseTolerances {
  double grad_tol = 0.0;
  double det_tol = 0.0;
};

/// Scale-invariant defaults: grad 1e-6 * range / min(h), det 1e-8 * range^2 / (hx hy)^2.
inline MorseTolerances default_morse_tolerances(const Image2D &img) {
  const double range = img.max() - img.min();
  const auto [hx, hy] = img.spacing();
  return {1e-6 * range / std::min(hx, hy), 1e-8 * range * range / (hx * hy * hx * hy)};
}

/// Inclusive pixel-coordinate window; critical points outside are ignored.
struct PixelWindow {
  double x0 = -std::numeric_limits<double>::infinity();
  double y0 = -std::numeric_limits<double>::infinity();
  double x1 = std::numeric_limits<double>::infinity();
  double y1 = std::numeric_limits<double>::infinity();

  bool contains(double x, double y) const noexcept {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }

  /// The image minus a border of `margin` pixels.
  static PixelWindow with_margin(const Image2D &img, double margin) {
    return {margin, margin, static_cast<double>(img.width()) - 1.0 - margin,
            static_cast<double>(img.height()) - 1.0 - margin};
  }
};

struct MorseReport {
  std::vector<CriticalPoint> points;
  bool is_morse = true;
  MorseTolerances tolerances;

  std::size_t count() const noexcept { return points.size(); }
  std::size_t count(CriticalKind k) const noexcept {
    std::size_t n = 0;
    for (const auto &p : points) n += p.kind == k;
    return n;
  }
};

namespace detail {

struct CellCorners {
  std::array<double, 4> v; // (0,0) (1,0) (0,1) (1,1)

  double at(double u, double w) const noexcept {
    return (1 - u) * (1 - w) * v[0] + u * (1 - w) * v[1] + (1 - u) * w * v[2] + u * w * v[3];
  }
  double du(double w) const noexcept { return (1 - w) * (v[1] - v[0]) + w * (v[3] - v[2]); }
  double dw(double u) const noexcept { return (1 - u) * (v[2] - v[0]) + u * (v[3] - v[1]); }
  bool brackets_zero() const noexcept {
    const auto [lo, hi] = std::minmax({v[0], v[1], v[2], v[3]});
    return lo <= 0.0 && hi >= 0.0;
  }
};

// Fourth-order central differences away from the two outer rows and columns,
// so the jets of cubic images are exact and a monkey saddle stays degenerate.
inline void refine_derivative(const Image2D &img, Image2D &d, bool along_x) {
  const std::size_t w = img.width(), h = img.height();
  const double step = along_x ? img.spacing().hx : img.spacing().hy;
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      const std::size_t c = along_x ? i : j, n = along_x ? w : h;
      if (c < 2 || c + 2 >= n) continue;
      const auto f = [&](long o) {
        return along_x ? img(i + o, j) : img(i, j + o);
      };
      d(i, j) = (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * step);
    }
}

inline void refine_second_derivative(const Image2D &img, Image2D &d, bool along_x) {
  const std::size_t w = img.width(), h = img.height();
  const double step = along_x ? img.spacing().hx : img.spacing().hy;
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t i = 0; i < w; ++i) {
      const std::size_t c = along_x ? i : j, n = along_x ? w : h;
      if (c < 2 || c + 2 >= n) continue;
      const auto f = [&](long o) {
        return along_x ? img(i + o, j) : img(i, j + o);
      };
      d(i, j) = (-f(-2) + 16.0 * f(-1) - 30.0 * f(0) + 16.0 * f(1) - f(2)) / (12.0 * step * step);
    }
}

struct MorseJets {
  VectorField g;
  HessianField hf;
};

inline MorseJets morse_jets(const Image2D &img) {
  MorseJets j{gradient(img), hessian(img)};
  refine_derivative(img, j.g.dx, true);
  refine_derivative(img, j.g.dy, false);
  refine_second_derivative(img, j.hf.dxx, true);
  refine_second_derivative(img, j.hf.dyy, false);
  refine_derivative(j.g.dx, j.hf.dxy, false);
  return j;
}

inline CellCorners corners(const Image2D &img, std::size_t i, std::size_t j) {
  return {{img(i, j), img(i + 1, j), img(i, j + 1), img(i + 1, j + 1)}};
}

} // namespace detail

/// Locates zeros of the discrete gradient cell by cell and classifies them by
/// the interpolated discrete Hessian. Points whose Newton refinement breaks
/// down are reported as degenerate rather than dropped.
inline MorseReport find_critical_points(const Image2D &img, MorseTolerances tol,
                                        PixelWindow window = {}) {
  if (img.width() < 5 || img.height() < 5)
    throw InvalidInput("find_critical_points: image must be at least 5x5");
  const auto [g, hf] = detail::morse_jets(img);
  MorseReport report;
  report.tolerances = tol;

  constexpr double own_lo = -1e-9, own_hi = 1.0 - 1e-9;
  constexpr std::array<std::array<double, 2>, 5> starts{
      {{0.5, 0.5}, {0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}}};

  for (std::size_t j = 0; j + 1 < img.height(); ++j)
    for (std::size_t i = 0; i + 1 < img.width(); ++i) {
      const auto gx = detail::corners(g.dx, i, j);
      const auto gy = detail::corners(g.dy, i, j);
      if (!gx.brackets_zero() || !gy.brackets_zero()) continue;

      bool found = false, singular = false;
      double u = 0.5, w = 0.5;
      for (const auto &s : starts) {
        u = s[0];
        w = s[1];
        bool converged = false;
        for (int it = 0; it < 30; ++it) {
          const double fx = gx.at(u, w), fy = gy.at(u, w);
          const double a = gx.du(w), b = gx.dw(u), c = gy.du(w), d = gy.dw(u);
          const double det = a * d - b * c;
          const double scale = std::abs(a * d) + std::abs(b * c);
          if (!(std::abs(det) > 1e-14 * scale) || scale == 0.0) {
            singular = std::hypot(fx, fy) <= tol.grad_tol;
            break;
          }
          const double du = (d * fx - b * fy) / det, dw = (a * fy - c * fx) / det;
          u -= du;
          w -= dw;
          if (std::abs(du) + std::abs(dw) < 1e-13) {
            converged = true;
            break;
          }
          if (std::abs(u - 0.5) > 2.0 || std::abs(w - 0.5) > 2.0) break;
        }
        if (singular) break;
        if (converged && u >= own_lo && u < own_hi && w >= own_lo && w < own_hi &&
            std::hypot(gx.at(u, w), gy.at(u, w)) <= tol.grad_tol) {
          found = true;
          break;
        }
      }
      if (!found && !singular) continue;
      if (singular) u = w = 0.5;

      CriticalPoint p;
      p.x = static_cast<double>(i) + u;
      p.y = static_cast<double>(j) + w;
      if (!window.contains(p.x, p.y)) continue;
      p.gradient_norm = std::hypot(gx.at(u, w), gy.at(u, w));
      const double hxx = detail::corners(hf.dxx, i, j).at(u, w);
      const double hxy = detail::corners(hf.dxy, i, j).at(u, w);
      const double hyy = detail::corners(hf.dyy, i, j).at(u, w);
      p.hessian_det = hxx * hyy - hxy * hxy;
      if (singular || std::abs(p.hessian_det) <= tol.det_tol)
        p.kind = CriticalKind::degenerate;
      else if (p.hessian_det < 0.0)
        p.kind = CriticalKind::saddle;
      else
        p.kind = (hxx + hyy) > 0.0 ? CriticalKind::minimum : CriticalKind::maximum;

      bool duplicate = false;
      for (const auto &q : report.points)
        if (std::abs(q.x - p.x) < 1e-6 && std::abs(q.y - p.y) < 1e-6) duplicate = true;
      if (!duplicate) report.points.push_back(p);
    }

  for (const auto &p : report.points)
    if (p.kind == CriticalKind::degenerate) report.is_morse = false;
  return report;
}

inline MorseReport find_critical_points(const Image2D &img, PixelWindow window = {}) {
  return find_critical_points(img, default_morse_tolerances(img), window);
}

/// Fraction of smoothed uniform-noise images that are Morse on the interior
/// window (margin 4 sigma). Trial k draws from a generator seeded with
/// (seed, k), so the result does not depend on scheduling.
inline double morse_genericity_trial(std::size_t n_trials, std::size_t image_size, double sigma,
                                     std::uint64_t seed) {
  if (n_trials < 1) throw InvalidInput("morse_genericity_trial: n_trials must be >= 1");
  if (!(sigma > 0.0)) throw InvalidInput("morse_genericity_trial: sigma must be positive");
  const double margin = 4.0 * sigma;
  if (image_size < 5 || 2.0 * margin >= static_cast<double>(image_size))
    throw InvalidInput("morse_genericity_trial: image too small for the interior window");

  std::vector<char> morse(n_trials, 0);
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < static_cast<long>(n_trials); ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image2D noise(image_size, image_size);
    for (double &v : noise.data()) v = uni(rng);
    const Image2D smooth = gaussian_convolve(noise, sigma);
    const double hi = static_cast<double>(image_size - 1) - margin;
    morse[t] = find_critical_points(smooth, PixelWindow{margin, margin, hi, hi}).is_morse;
  }
  std::size_t passed = 0;
  for (char m : morse) passed += m;
  return static_cast<double>(passed) / static_cast<double>(n_trials);
}

namespace detail {

// Rows: G, d1 G, d2 G, d11 G, d12 G, d22 G, each divided by G and evaluated
// at (x - xb, y - yb) with (x, y) = (0, 0).
inline std::array<double, 6> gaussian_jet_over_gaussian(double xb, double yb, double sx,
                                                        double sy) {
  const double u = -xb, v = -yb;
  const double sx2 = sx * sx, sy2 = sy * sy;
  return {1.0,
          -u / sx2,
          -v / sy2,
          u * u / (sx2 * sx2) - 1.0 / sx2,
          u * v / (sx2 * sy2),
          v * v / (sy2 * sy2) - 1.0 / sy2};
}

inline double transversality_det_at(double eps, double sx, double sy, std::size_t n) {
  const QuadratureRule rule = gauss_legendre(n, -eps, eps);
  Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double xb = rule.nodes[a], yb = rule.nodes[b];
      const double wgt = rule.weights[a] * rule.weights[b];
      const std::array<double, 6> mono{1.0, xb, yb, xb * xb, xb * yb, yb * yb};
      const auto jet = gaussian_jet_over_gaussian(xb, yb, sx, sy);
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) m(r, c) += wgt * mono[c] * jet[r];
    }
  return m.determinant();
}

} // namespace detail

/// Determinant of the 6x6 linear map taking the coefficients of a quadratic
/// perturbation supported on [-eps, eps]^2 to the 2-jet of its Gaussian
/// smoothing at the origin. Assembled by tensor Gauss-Legendre quadrature at
/// two resolutions; disagreement beyond 1e-10 relative is a failure.
inline double transversality_determinant(double eps, double sigma_x, double sigma_y) {
  if (!(eps > 0.0) || !(sigma_x > 0.0) || !(sigma_y > 0.0))
    throw InvalidInput("transversality_determinant: eps and sigmas must be positive");
  const double coarse = detail::transversality_det_at(eps, sigma_x, sigma_y, 8);
  const double fine = detail::transversality_det_at(eps, sigma_x, sigma_y, 16);
  const double residual = std::abs(fine - coarse) / std::abs(fine);
  if (!(residual < 1e-10))
    throw NumericalFailure("transversality_determinant: quadrature did not converge", residual);
  return fine;
}

} // namespace hypodiff

#endif
