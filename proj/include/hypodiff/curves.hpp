#ifndef HYPODIFF_CURVES_HPP
#define HYPODIFF_CURVES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace hypodiff {

/// Samples (x_i, y_i) at strictly increasing parameter values t_i.
struct PlanarCurve {
  std::vector<double> t, x, y;

  std::size_t size() const noexcept { return t.size(); }

  void validate() const {
    if (t.size() < 3) throw InvalidInput("PlanarCurve: need at least 3 samples");
    if (x.size() != t.size() || y.size() != t.size())
      throw InvalidInput("PlanarCurve: coordinate arrays differ in length");
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!std::isfinite(t[i]) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
        throw InvalidInput("PlanarCurve: non-finite sample");
      if (i > 0 && !(t[i] > t[i - 1]))
        throw InvalidInput("PlanarCurve: parameter must be strictly increasing");
    }
  }

  /// Samples fn(t) -> {x, y} at n uniform parameter values on [t0, t1].
  template <class Fn>
  static PlanarCurve sample(double t0, double t1, std::size_t n, Fn &&fn) {
    PlanarCurve c;
    c.t.resize(n);
    c.x.resize(n);
    c.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
      const auto [px, py] = fn(c.t[i]);
      c.x[i] = px;
      c.y[i] = py;
    }
    return c;
  }
};

/// Samples (x_i, y_i, theta_i) with theta in [0, period).
struct LiftedCurve {
  std::vector<double> t, x, y, theta;
  double period = std::numbers::pi;

  std::size_t size() const noexcept { return t.size(); }
  PlanarCurve planar() const { return {t, x, y}; }
};

namespace detail {

// Fourth-order derivatives with respect to the sample index.
inline std::vector<double> index_derivative(const std::vector<double> &f) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  if (n < 6) {
    d[0] = -1.5 * f[0] + 2.0 * f[1] - 0.5 * f[2];
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = 0.5 * (f[i + 1] - f[i - 1]);
    d[n - 1] = 1.5 * f[n - 1] - 2.0 * f[n - 2] + 0.5 * f[n - 3];
    return d;
  }
  d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / 12.0;
  d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / 12.0;
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / 12.0;
  d[n - 2] = (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] + 6 * f[n - 4] - f[n - 5]) / 12.0;
  d[n - 1] = (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] - 16 * f[n - 4] + 3 * f[n - 5]) / 12.0;
  return d;
}

inline std::vector<double> index_second_derivative(const std::vector<double> &f) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  if (n < 6) {
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = f[i + 1] - 2.0 * f[i] + f[i - 1];
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
  }
  d[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / 12.0;
  d[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / 12.0;
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / 12.0;
  d[n - 2] = (10 * f[n - 1] - 15 * f[n - 2] - 4 * f[n - 3] + 14 * f[n - 4] - 6 * f[n - 5] +
              f[n - 6]) / 12.0;
  d[n - 1] = (45 * f[n - 1] - 154 * f[n - 2] + 214 * f[n - 3] - 156 * f[n - 4] +
              61 * f[n - 5] - 10 * f[n - 6]) / 12.0;
  return d;
}

// Composite Simpson over unit-spaced samples; 3/8 rule on the last three
// intervals when the interval count is odd.
inline double integrate_unit_spacing(const std::vector<double> &g) {
  const std::size_t n = g.size();
  if (n == 2) return 0.5 * (g[0] + g[1]);
  const std::size_t intervals = n - 1;
  std::size_t simpson_end = intervals % 2 == 0 ? n - 1 : n - 4;
  if (intervals == 1) return 0.5 * (g[0] + g[1]);
  double s = 0.0;
  if (intervals == 3) simpson_end = 0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
    s += (g[i] + 4.0 * g[i + 1] + g[i + 2]) / 3.0;
  if (intervals % 2 == 1) {
    const std::size_t i = simpson_end;
    s += 3.0 / 8.0 * (g[i] + 3.0 * g[i + 1] + 3.0 * g[i + 2] + g[i + 3]);
  }
  return s;
}

struct CurveDerivatives {
  std::vector<double> dx, dy, ddx, ddy, dt; // with respect to the sample index
};

inline CurveDerivatives curve_derivatives(const PlanarCurve &c) {
  return {index_derivative(c.x), index_derivative(c.y), index_second_derivative(c.x),
          index_second_derivative(c.y), index_derivative(c.t)};
}

// Relative speed below which a node counts as having vanishing velocity.
inline constexpr double kStillSpeed = 1e-6;

inline void require_moving(const CurveDerivatives &d) {
  double vmax = 0.0;
  for (std::size_t i = 0; i < d.dx.size(); ++i) vmax = std::max(vmax, std::hypot(d.dx[i], d.dy[i]));
  for (std::size_t i = 0; i < d.dx.size(); ++i)
    if (!(std::hypot(d.dx[i], d.dy[i]) > kStillSpeed * vmax)) throw CuspCandidate(i);
}

} // namespace detail

/// J_beta = int sqrt(|g'|^2 + beta^2 |g'|^2 K^2) dt, with K = (x'y'' - y'x'') / |g'|^3.
/// The integrand is parametrization invariant, so it is evaluated against the
/// sample index with fourth-order differences. Throws CuspCandidate when the
/// velocity vanishes at a node.
inline double cost_J(const PlanarCurve &c, double beta = 1.0) {
  c.validate();
  const auto d = detail::curve_derivatives(c);
  detail::require_moving(d);
  std::vector<double> g(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v2 = d.dx[i] * d.dx[i] + d.dy[i] * d.dy[i];
    const double cross = d.dx[i] * d.ddy[i] - d.dy[i] * d.ddx[i];
    g[i] = std::sqrt(v2 + beta * beta * cross * cross / (v2 * v2));
  }
  return detail::integrate_unit_spacing(g);
}

/// E_beta = int (|g'|^2 + beta^2 |g'|^2 K^2) dt in the curve's own parameter t.
inline double energy_E(const PlanarCurve &c, double beta = 1.0) {
  c.validate();
  const auto d = detail::curve_derivatives(c);
  detail::require_moving(d);
  std::vector<double> g(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v2 = d.dx[i] * d.dx[i] + d.dy[i] * d.dy[i];
    const double cross = d.dx[i] * d.ddy[i] - d.dy[i] * d.ddx[i];
    // |dg/dt|^2 (1 + beta^2 K^2) dt/du, with dg/dt = g' / t'.
    g[i] = (v2 + beta * beta * cross * cross / (v2 * v2)) / d.dt[i];
  }
  return detail::integrate_unit_spacing(g);
}

/// Scales a curve by the homothety (x, y) -> (s x, s y).
inline PlanarCurve scaled(PlanarCurve c, double s) {
  for (auto &v : c.x) v *= s;
  for (auto &v : c.y) v *= s;
  return c;
}

struct HomothetyPair {
  double scaled_cost = 0.0;    ///< J_beta evaluated on the curve scaled by beta
  double reference_cost = 0.0; ///< beta^2 J_1 of the original curve
};

/// Both sides of the homothety relation J_beta[beta gamma] vs beta^2 J[gamma].
inline HomothetyPair homothety_check(const PlanarCurve &c, double beta) {
  return {cost_J(scaled(c, beta), beta), beta * beta * cost_J(c, 1.0)};
}

namespace detail {

inline double circular_mean(std::span<const double> angles, double period) {
  double sx = 0.0, sy = 0.0;
  for (double a : angles) {
    const double phi = 2.0 * std::numbers::pi * a / period;
    sx += std::cos(phi);
    sy += std::sin(phi);
  }
  return wrap_angle(std::atan2(sy, sx) * period / (2.0 * std::numbers::pi), period);
}

} // namespace detail

/// theta = atan2(y', x') mod period. Isolated nodes with vanishing velocity
/// take the circular mean of their neighbours' directions.
inline LiftedCurve lift_curve(const PlanarCurve &c, double period = std::numbers::pi) {
  c.validate();
  if (!AngleGrid::is_pi(period) && !AngleGrid::is_two_pi(period))
    throw InvalidInput("lift_curve: period must be pi or 2 pi");
  const auto d = detail::curve_derivatives(c);
  const std::size_t n = c.size();
  double vmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) vmax = std::max(vmax, std::hypot(d.dx[i], d.dy[i]));
  std::vector<char> still(n);
  for (std::size_t i = 0; i < n; ++i)
    still[i] = !(std::hypot(d.dx[i], d.dy[i]) > detail::kStillSpeed * vmax);

  LiftedCurve out{c.t, c.x, c.y, std::vector<double>(n), period};
  for (std::size_t i = 0; i < n; ++i)
    if (!still[i]) out.theta[i] = wrap_angle(std::atan2(d.dy[i], d.dx[i]), period);
  for (std::size_t i = 0; i < n; ++i) {
    if (!still[i]) continue;
    if ((i > 0 && still[i - 1]) || (i + 1 < n && still[i + 1]))
      throw InvalidInput("lift_curve: velocity vanishes on consecutive nodes");
    std::vector<double> nb;
    if (i > 0) nb.push_back(out.theta[i - 1]);
    if (i + 1 < n) nb.push_back(out.theta[i + 1]);
    out.theta[i] = detail::circular_mean(nb, period);
  }
  return out;
}

/// Point (x, y, theta) of the rototranslation state space.
struct ControlState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Classical RK4 for (x', y', theta') = u1 (cos theta, sin theta, 0) + u2 (0, 0, 1).
/// Theta is integrated unreduced and stored wrapped into [0, period).
inline LiftedCurve integrate_control_system(const std::function<double(double)> &u1,
                                            const std::function<double(double)> &u2,
                                            ControlState q0, double duration, double dt,
                                            double period = 2.0 * std::numbers::pi) {
  if (!(dt > 0.0)) throw InvalidInput("integrate_control_system: dt must be positive");
  if (!(duration >= 0.0)) throw InvalidInput("integrate_control_system: negative duration");
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  const auto rhs = [&](double t, const std::array<double, 3> &s) {
    const double a = u1(t), b = u2(t);
    return std::array<double, 3>{a * std::cos(s[2]), a * std::sin(s[2]), b};
  };

  LiftedCurve out;
  out.period = period;
  std::array<double, 3> s{q0.x, q0.y, q0.theta};
  double t = 0.0;
  const auto record = [&] {
    out.t.push_back(t);
    out.x.push_back(s[0]);
    out.y.push_back(s[1]);
    out.theta.push_back(wrap_angle(s[2], period));
  };
  record();
  for (std::size_t k = 0; k < steps; ++k) {
    const double h = std::min(dt, duration - t);
    const auto axpy = [](const std::array<double, 3> &a, double c, const std::array<double, 3> &b) {
      return std::array<double, 3>{a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]};
    };
    const auto k1 = rhs(t, s);
    const auto k2 = rhs(t + h / 2, axpy(s, h / 2, k1));
    const auto k3 = rhs(t + h / 2, axpy(s, h / 2, k2));
    const auto k4 = rhs(t + h, axpy(s, h, k3));
    for (int i = 0; i < 3; ++i) s[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t = (k + 1 == steps) ? duration : t + h;
    record();
  }
  return out;
}

/// Nodes where the planar projection has a cusp: a local minimum of the
/// planar speed below `speed_tol` times the maximum speed, where the planar
/// direction reverses (cosine of the turn below -0.9) while theta keeps
/// moving.
inline std::vector<std::size_t> detect_cusps(const LiftedCurve &c, double speed_tol = 1e-3) {
  const std::size_t n = c.size();
  std::vector<std::size_t> cusps;
  if (n < 5) return cusps;
  const PlanarCurve pc = c.planar();
  const auto d = detail::curve_derivatives(pc);
  std::vector<double> speed(n), omega(n);
  std::vector<double> unwrapped(n);
  unwrapped[0] = c.theta[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double step = wrap_angle(c.theta[i] - c.theta[i - 1] + c.period / 2, c.period) -
                        c.period / 2;
    unwrapped[i] = unwrapped[i - 1] + step;
  }
  const auto dtheta = detail::index_derivative(unwrapped);
  double vmax = 0.0, wmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    speed[i] = std::hypot(d.dx[i], d.dy[i]) / d.dt[i];
    omega[i] = std::abs(dtheta[i] / d.dt[i]);
    vmax = std::max(vmax, speed[i]);
    wmax = std::max(wmax, omega[i]);
  }
  if (vmax == 0.0 || wmax == 0.0) return cusps;

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(speed[i] <= speed[i - 1] && speed[i] < speed[i + 1])) continue;
    if (!(speed[i] < speed_tol * vmax)) continue;
    if (!(omega[i] > 1e-3 * wmax)) continue;
    // Compare directions on either side once the speed has recovered.
    std::size_t lo = i, hi = i;
    while (lo > 0 && speed[lo] < 10.0 * speed[i] + 1e-300 && i - lo < 64) --lo;
    while (hi + 1 < n && speed[hi] < 10.0 * speed[i] + 1e-300 && hi - i < 64) ++hi;
    const double ca = (d.dx[lo] * d.dx[hi] + d.dy[lo] * d.dy[hi]) /
                      (std::hypot(d.dx[lo], d.dy[lo]) * std::hypot(d.dx[hi], d.dy[hi]));
    if (ca < -0.9) cusps.push_back(i);
  }
  return cusps;
}

/// Writes one "t x y" (or "t x y theta") row per sample.
inline void write_curve(std::ostream &os, const PlanarCurve &c) {
  os.precision(17);
  for (std::size_t i = 0; i < c.size(); ++i) os << c.t[i] << ' ' << c.x[i] << ' ' << c.y[i] << '\n';
}

inline void write_curve(std::ostream &os, const LiftedCurve &c) {
  os.precision(17);
  for (std::size_t i = 0; i < c.size(); ++i)
    os << c.t[i] << ' ' << c.x[i] << ' ' << c.y[i] << ' ' << c.theta[i] << '\n';
}

/// Reads "t x y [theta]" rows; blank lines and lines starting with '#' are
/// skipped. Theta, when present on every row, is returned in `theta`.
inline LiftedCurve read_curve(std::istream &is, double period = std::numbers::pi) {
  LiftedCurve c;
  c.period = period;
  std::string line;
  std::size_t offset = 0;
  bool all_theta = true;
  while (std::getline(is, line)) {
    const std::size_t start = offset;
    offset += line.size() + 1;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double t, x, y, th;
    if (!(row >> t >> x >> y)) throw FormatError("curve: expected 't x y [theta]'", start);
    c.t.push_back(t);
    c.x.push_back(x);
    c.y.push_back(y);
    if (row >> th)
      c.theta.push_back(th);
    else
      all_theta = false;
  }
  if (!all_theta) c.theta.clear();
  return c;
}

} // namespace hypodiff

#endif
