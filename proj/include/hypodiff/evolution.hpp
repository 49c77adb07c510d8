#ifndef HYPODIFF_EVOLUTION_HPP
#define HYPODIFF_EVOLUTION_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "dft.hpp"
#include "grid.hpp"

namespace hypodiff {

/// ptr2: theta mod pi, sum-of-squares generator. se2: the same generator with
/// theta mod 2 pi. mumford: drift X1 plus beta^2 d^2/dtheta^2, theta mod 2 pi.
enum class Mode { ptr2, se2, mumford };
enum class Solver { automatic, eigen_exponential, crank_nicolson };

inline double mode_period(Mode m) noexcept {
  return m == Mode::ptr2 ? std::numbers::pi : 2.0 * std::numbers::pi;
}

inline const char *to_string(Mode m) noexcept {
  switch (m) {
  case Mode::ptr2: return "ptr2";
  case Mode::se2: return "se2";
  case Mode::mumford: return "mumford";
  }
  return "unknown";
}

struct EvolutionParams {
  double beta = 1.0;
  double time = 0.0;
  Mode mode = Mode::ptr2;
  Solver solver = Solver::automatic;
  std::size_t n_substeps = 64; ///< Crank-Nicolson steps over [0, time]
  /// +1 evolves with the drift +X1, -1 with -X1 (mumford mode only).
  int drift_direction = 1;
};

/// Theta profile of one spatial frequency (xi1, xi2), cycles per unit length.
struct FrequencySlice {
  double xi1 = 0.0;
  double xi2 = 0.0;
  std::vector<Complex> profile;
};

namespace detail {

// Under the forward kernel exp(-2 pi i <xi, X>), X1 = cos d_x + sin d_y acts as
// multiplication by +2 pi i (xi1 cos + xi2 sin). Pinned by the real-space
// regression test in test_evolution.
inline constexpr double kDriftSign = 1.0;

inline void check_mode_grid(const EvolutionParams &p, const AngleGrid &grid) {
  const bool ok = p.mode == Mode::ptr2 ? grid.is_projective() : !grid.is_projective();
  if (!ok) throw InvalidInput("evolution: angle-grid period does not match the mode");
  if (p.time < 0.0) throw InvalidInput("evolution: time must be non-negative");
}

inline double projected_frequency(double xi1, double xi2, double theta) noexcept {
  return xi1 * std::cos(theta) + xi2 * std::sin(theta);
}

} // namespace detail

/// Spatial frequency of one DFT bin. The odd_* components feed odd-order
/// derivatives (the drift and the mixed d_x d_y term); they are zero on a
/// Nyquist row or column, where an odd derivative has no real-valued symbol.
struct FrequencyPoint {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double odd1 = 0.0;
  double odd2 = 0.0;

  static FrequencyPoint plain(double xi1, double xi2) noexcept { return {xi1, xi2, xi1, xi2}; }

  static FrequencyPoint of_bin(std::size_t k, std::size_t l, std::size_t w, std::size_t h,
                               Spacing sp) noexcept {
    const double x1 = frequency(k, w, sp.hx), x2 = frequency(l, h, sp.hy);
    const bool nyq1 = w % 2 == 0 && k == w / 2, nyq2 = h % 2 == 0 && l == h / 2;
    return {x1, x2, nyq1 ? 0.0 : x1, nyq2 ? 0.0 : x2};
  }

  /// 4 pi^2 (xi . e_theta)^2 with the mixed term built from the odd components.
  double potential(double theta) const noexcept {
    const double c = std::cos(theta), s = std::sin(theta);
    const double quad = xi1 * xi1 * c * c + 2.0 * odd1 * odd2 * c * s + xi2 * xi2 * s * s;
    return 4.0 * std::numbers::pi * std::numbers::pi * quad;
  }

  /// 2 pi (xi . e_theta), the symbol of X1 divided by i.
  double drift(double theta) const noexcept {
    return 2.0 * std::numbers::pi * detail::projected_frequency(odd1, odd2, theta);
  }
};

namespace detail {

inline bool use_eigen(const EvolutionParams &p, std::size_t n) noexcept {
  if (p.mode == Mode::mumford) return false;
  switch (p.solver) {
  case Solver::eigen_exponential: return true;
  case Solver::crank_nicolson: return false;
  case Solver::automatic: return n <= 128;
  }
  return true;
}

// Solves a periodic tridiagonal system with constant off-diagonals `lower`,
// `upper` (including the wrap-around corners) and diagonal `diag`.
inline void solve_cyclic_tridiagonal(Complex lower, std::span<const Complex> diag, Complex upper,
                                     std::span<Complex> rhs) {
  const std::size_t n = diag.size();
  const auto thomas = [&](std::span<const Complex> b, std::span<Complex> x) {
    std::vector<Complex> cp(n);
    Complex denom = b[0];
    cp[0] = upper / denom;
    x[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
      denom = b[i] - lower * cp[i - 1];
      cp[i] = upper / denom;
      x[i] = (x[i] - lower * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  };
  // Sherman-Morrison: corner (0, n-1) = lower, corner (n-1, 0) = upper.
  const Complex gamma = -diag[0];
  std::vector<Complex> bb(diag.begin(), diag.end());
  bb[0] -= gamma;
  bb[n - 1] -= upper * lower / gamma;
  thomas(bb, rhs);
  std::vector<Complex> z(n, Complex{});
  z[0] = gamma;
  z[n - 1] = upper;
  thomas(bb, z);
  const Complex fact =
      (rhs[0] + lower * rhs[n - 1] / gamma) / (1.0 + z[0] + lower * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * z[i];
}

inline void crank_nicolson(std::span<Complex> u, std::span<const Complex> diag_gen, double off,
                           double time, std::size_t steps) {
  const std::size_t n = u.size();
  const double dt = time / static_cast<double>(steps);
  std::vector<Complex> lhs(n), rhs(n);
  for (std::size_t k = 0; k < n; ++k) lhs[k] = 1.0 - 0.5 * dt * diag_gen[k];
  const Complex lo = -0.5 * dt * off;
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t k = 0; k < n; ++k) {
      const Complex left = u[(k + n - 1) % n], right = u[(k + 1) % n];
      rhs[k] = (1.0 + 0.5 * dt * diag_gen[k]) * u[k] + 0.5 * dt * off * (left + right);
    }
    solve_cyclic_tridiagonal(lo, lhs, lo, rhs);
    std::copy(rhs.begin(), rhs.end(), u.begin());
  }
}

} // namespace detail

/// Dense real-symmetric theta generator beta^2 D2 - 4 pi^2 (xi . e_theta)^2
/// for the ptr2 and se2 modes; D2 is the periodic second difference.
inline Eigen::MatrixXd theta_generator(const FrequencyPoint &xi, double beta,
                                       const AngleGrid &grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double d2 = beta * beta / (grid.step() * grid.step());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    a(k, k) = -2.0 * d2 - xi.potential(grid.node(k));
    a(k, (k + 1) % n) += d2;
    a(k, (k + n - 1) % n) += d2;
  }
  return a;
}

/// Evolves one frequency's theta profile over the time p.time.
inline void evolve_profile(std::span<Complex> u, const FrequencyPoint &xi,
                           const EvolutionParams &p, const AngleGrid &grid) {
  const std::size_t n = grid.size();
  if (u.size() != n) throw InvalidInput("evolve_single_frequency: profile length != n_theta");
  if (p.time == 0.0) return;

  if (detail::use_eigen(p, n)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta_generator(xi, p.beta, grid));
    if (es.info() != Eigen::Success)
      throw NumericalFailure("evolve_single_frequency: eigen-decomposition failed", 0.0);
    const Eigen::MatrixXd &q = es.eigenvectors();
    const Eigen::ArrayXd decay = (p.time * es.eigenvalues().array()).exp();
    Eigen::Map<Eigen::VectorXcd> v(u.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXcd coeff = q.transpose() * v;
    coeff.array() *= decay;
    v = q * coeff;
    return;
  }

  const double off = p.beta * p.beta / (grid.step() * grid.step());
  std::vector<Complex> diag(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = grid.node(k);
    if (p.mode == Mode::mumford)
      diag[k] = Complex(-2.0 * off, detail::kDriftSign * p.drift_direction * xi.drift(theta));
    else
      diag[k] = -2.0 * off - xi.potential(theta);
  }
  detail::crank_nicolson(u, diag, off, p.time, std::max<std::size_t>(p.n_substeps, 1));
}

inline FrequencySlice evolve_single_frequency(FrequencySlice s, const EvolutionParams &p,
                                              const AngleGrid &grid) {
  detail::check_mode_grid(p, grid);
  evolve_profile(s.profile, FrequencyPoint::plain(s.xi1, s.xi2), p, grid);
  return s;
}

struct EvolutionResult {
  LiftedField field;
  double imaginary_residue = 0.0; ///< ||Im|| / ||Re|| after the inverse transform
  double mass_drift = 0.0;        ///< relative change of the field sum
};

/// Spatial DFT per theta layer, independent theta evolution per frequency,
/// inverse DFT. Space is periodic; callers pad to suppress wrap-around.
inline EvolutionResult evolve_field_with_diagnostics(const LiftedField &v,
                                                     const EvolutionParams &p) {
  detail::check_mode_grid(p, v.angles());
  if (!v.all_finite()) throw InvalidInput("evolve_field: non-finite input");
  const std::size_t w = v.width(), h = v.height(), n = v.n_theta();
  const double mass_before = v.sum();

  std::vector<Complex> buf(v.data().begin(), v.data().end());
  detail::dft2_many(buf, w, h, n, FFTW_FORWARD);

  const long n_freq = static_cast<long>(w * h);
#pragma omp parallel for schedule(static)
  for (long f = 0; f < n_freq; ++f) {
    const auto k = static_cast<std::size_t>(f) % w, l = static_cast<std::size_t>(f) / w;
    std::span<Complex> profile(buf.data() + static_cast<std::size_t>(f) * n, n);
    evolve_profile(profile, FrequencyPoint::of_bin(k, l, w, h, v.spacing()), p, v.angles());
  }

  detail::dft2_many(buf, w, h, n, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(w * h);
  EvolutionResult r{LiftedField(w, h, v.spacing(), v.angles()), 0.0, 0.0};
  double re2 = 0.0, im2 = 0.0;
  auto out = r.field.data();
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const Complex c = buf[i] * scale;
    out[i] = c.real();
    re2 += c.real() * c.real();
    im2 += c.imag() * c.imag();
  }
  r.imaginary_residue = re2 > 0.0 ? std::sqrt(im2 / re2) : std::sqrt(im2);
  const double mass_after = r.field.sum();
  r.mass_drift = mass_before != 0.0 ? std::abs(mass_after - mass_before) / std::abs(mass_before)
                                    : std::abs(mass_after);
  if (!(r.imaginary_residue < 1e-9))
    throw NumericalFailure("evolve_field: imaginary residue too large", r.imaginary_residue);
  return r;
}

inline LiftedField evolve_field(const LiftedField &v, const EvolutionParams &p) {
  return evolve_field_with_diagnostics(v, p).field;
}

/// Averages each fiber with its antipode: v(theta) <- (v(theta) + v(theta + pi)) / 2.
inline LiftedField symmetrize_se2(const LiftedField &v) {
  if (v.angles().is_projective())
    throw InvalidInput("symmetrize_se2: field must have period 2 pi");
  const std::size_t n = v.n_theta();
  if (n % 2 != 0) throw InvalidInput("symmetrize_se2: n_theta must be even");
  LiftedField out(v.width(), v.height(), v.spacing(), v.angles());
  for (std::size_t y = 0; y < v.height(); ++y)
    for (std::size_t x = 0; x < v.width(); ++x) {
      const auto src = v.fiber(x, y);
      auto dst = out.fiber(x, y);
      for (std::size_t k = 0; k < n; ++k) dst[k] = 0.5 * (src[k] + src[(k + n / 2) % n]);
    }
  return out;
}

/// Pixelwise maximum over the fiber.
inline Image2D project_max(const LiftedField &v) {
  Image2D out(v.width(), v.height(), v.spacing());
  for (std::size_t y = 0; y < v.height(); ++y)
    for (std::size_t x = 0; x < v.width(); ++x) {
      const auto f = v.fiber(x, y);
      out(x, y) = *std::max_element(f.begin(), f.end());
    }
  return out;
}

} // namespace hypodiff

#endif
