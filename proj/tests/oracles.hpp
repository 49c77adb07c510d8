#ifndef HYPODIFF_TESTS_ORACLES_HPP
#define HYPODIFF_TESTS_ORACLES_HPP

// Reference computations used by the tests. They share no code with the
// library beyond the plain data types.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hypodiff/grid.hpp"

namespace oracle {

using Cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Matrix exponential by diagonal Pade(8, 8) with scaling and squaring.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd &a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXcd x = a / std::ldexp(1.0, s);
  const int q = 8;
  const auto n = a.rows();
  Eigen::MatrixXcd num = Eigen::MatrixXcd::Identity(n, n), den = num, power = num;
  double c = 1.0;
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
    power = power * x;
    num += c * power;
    den += ((k % 2) ? -c : c) * power;
  }
  Eigen::MatrixXcd e = den.partialPivLu().solve(num);
  for (int k = 0; k < s; ++k) e = e * e;
  return e;
}

/// Theta generator built directly from the operator: periodic second
/// difference times beta^2 minus 4 pi^2 (xi . e_theta)^2, or for the drift
/// model plus i 2 pi sign (xi . e_theta).
inline Eigen::MatrixXcd generator(double xi1, double xi2, double beta, std::size_t n,
                                  double period, bool drift = false, double sign = 1.0) {
  const double h = period / static_cast<double>(n);
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = static_cast<double>(k) * h;
    const double proj = xi1 * std::cos(th) + xi2 * std::sin(th);
    g(k, k) = -2.0 * beta * beta / (h * h);
    g(k, (k + 1) % n) += beta * beta / (h * h);
    g(k, (k + n - 1) % n) += beta * beta / (h * h);
    if (drift)
      g(k, k) += Cplx(0.0, sign * 2.0 * pi * proj);
    else
      g(k, k) -= 4.0 * pi * pi * proj * proj;
  }
  return g;
}

/// Method-of-lines RK4 in real space on a periodic (x, y, theta) grid with
/// fourth-order central differences in x and y and the second difference in
/// theta. `drift` selects d_t = X1 + beta^2 d_theta^2 instead of
/// X1^2 + beta^2 d_theta^2, with X1 = cos d_x + sin d_y.
class RealSpaceSolver {
public:
  RealSpaceSolver(std::size_t w, std::size_t h, std::size_t n, double dx, double period,
                  double beta, bool drift)
      : w_(w), h_(h), n_(n), dx_(dx), dth_(period / n), beta_(beta), drift_(drift) {}

  std::vector<double> evolve(std::vector<double> u, double time, double dt) const {
    const auto steps = static_cast<std::size_t>(std::ceil(time / dt - 1e-12));
    const double tau = time / static_cast<double>(steps);
    std::vector<double> k1, k2, k3, k4, tmp(u.size());
    for (std::size_t s = 0; s < steps; ++s) {
      k1 = rhs(u);
      for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * tau * k1[i];
      k2 = rhs(tmp);
      for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + 0.5 * tau * k2[i];
      k3 = rhs(tmp);
      for (std::size_t i = 0; i < u.size(); ++i) tmp[i] = u[i] + tau * k3[i];
      k4 = rhs(tmp);
      for (std::size_t i = 0; i < u.size(); ++i)
        u[i] += tau / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return u;
  }

private:
  std::size_t at(long x, long y, long k) const {
    const auto m = [](long a, std::size_t n) { return static_cast<std::size_t>(((a % long(n)) + long(n)) % long(n)); };
    return (m(y, h_) * w_ + m(x, w_)) * n_ + m(k, n_);
  }

  // Fourth-order first derivative along the given step direction.
  double d1(const std::vector<double> &u, long x, long y, long k, long sx, long sy) const {
    return (u[at(x - 2 * sx, y - 2 * sy, k)] - 8 * u[at(x - sx, y - sy, k)] +
            8 * u[at(x + sx, y + sy, k)] - u[at(x + 2 * sx, y + 2 * sy, k)]) /
           (12.0 * dx_);
  }

  double d2(const std::vector<double> &u, long x, long y, long k, long sx, long sy) const {
    return (-u[at(x - 2 * sx, y - 2 * sy, k)] + 16 * u[at(x - sx, y - sy, k)] - 30 * u[at(x, y, k)] +
            16 * u[at(x + sx, y + sy, k)] - u[at(x + 2 * sx, y + 2 * sy, k)]) /
           (12.0 * dx_ * dx_);
  }

  double dxy(const std::vector<double> &u, long x, long y, long k) const {
    const long o[4] = {-2, -1, 1, 2};
    const double c[4] = {1, -8, 8, -1};
    double s = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += c[a] * c[b] * u[at(x + o[a], y + o[b], k)];
    return s / (144.0 * dx_ * dx_);
  }

  std::vector<double> rhs(const std::vector<double> &u) const {
    std::vector<double> out(u.size());
    for (long y = 0; y < long(h_); ++y)
      for (long x = 0; x < long(w_); ++x)
        for (long k = 0; k < long(n_); ++k) {
          const double c = std::cos(k * dth_), s = std::sin(k * dth_);
          const double theta_part =
              beta_ * beta_ * (u[at(x, y, k + 1)] - 2 * u[at(x, y, k)] + u[at(x, y, k - 1)]) / (dth_ * dth_);
          double space;
          if (drift_)
            space = c * d1(u, x, y, k, 1, 0) + s * d1(u, x, y, k, 0, 1);
          else
            space = c * c * d2(u, x, y, k, 1, 0) + 2 * c * s * dxy(u, x, y, k) + s * s * d2(u, x, y, k, 0, 1);
          out[at(x, y, k)] = space + theta_part;
        }
    return out;
  }

  std::size_t w_, h_, n_;
  double dx_, dth_, beta_;
  bool drift_;
};

/// Sum in extended precision.
inline double brute_force_sum(const std::vector<double> &v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

} // namespace oracle

#endif
