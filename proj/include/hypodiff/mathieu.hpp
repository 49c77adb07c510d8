#ifndef HYPODIFF_MATHIEU_HPP
#define HYPODIFF_MATHIEU_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"

namespace hypodiff {

/// Characteristic values and Fourier coefficients of the 2 pi-periodic Mathieu
/// functions of y'' + (a - 2 q cos 2x) y = 0.
///
/// ce[n] holds A_k with ce_n(x) = sum_k A_k cos(k x), k = 0..M; se[n] holds
/// B_k with se_n(x) = sum_k B_k sin(k x) (B_0 = 0). Every function has unit
/// L^2 norm on [0, 2 pi) and its first non-negligible coefficient positive.
struct MathieuBasis {
  double q = 0.0;
  std::size_t order_max = 0;
  std::size_t truncation = 0; ///< highest harmonic M
  std::vector<double> char_a; ///< a_0 .. a_order_max
  std::vector<double> char_b; ///< b_1 .. b_order_max, stored at index n - 1
  std::vector<std::vector<double>> ce;
  std::vector<std::vector<double>> se; ///< se_n stored at index n - 1
  /// max ||A v - mu v|| over all returned pairs, in the orthonormal basis
  double max_residual = 0.0;

  double a(std::size_t n) const { return char_a.at(n); }
  double b(std::size_t n) const { return char_b.at(n - 1); }
  const std::vector<double> &ce_coeffs(std::size_t n) const { return ce.at(n); }
  const std::vector<double> &se_coeffs(std::size_t n) const { return se.at(n - 1); }

  static double eval_cos_series(const std::vector<double> &c, double x) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(static_cast<double>(k) * x);
    return s;
  }
  static double eval_sin_series(const std::vector<double> &c, double x) {
    double s = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) s += c[k] * std::sin(static_cast<double>(k) * x);
    return s;
  }
  double ce_at(std::size_t n, double x) const { return eval_cos_series(ce_coeffs(n), x); }
  double se_at(std::size_t n, double x) const { return eval_sin_series(se_coeffs(n), x); }
};

namespace detail {

enum class MathieuClass { cos_even, cos_odd, sin_even, sin_odd };

struct MathieuBlock {
  std::vector<std::size_t> harmonics;
  Eigen::MatrixXd matrix; // in the orthonormal cos/sin basis
};

// Matrix of -d^2/dx^2 + 2 q cos 2x restricted to one parity class, in the
// basis 1/sqrt(2 pi), cos(kx)/sqrt(pi), sin(kx)/sqrt(pi).
inline MathieuBlock mathieu_block(MathieuClass cls, double q, std::size_t truncation) {
  MathieuBlock blk;
  std::size_t first = 0;
  switch (cls) {
  case MathieuClass::cos_even: first = 0; break;
  case MathieuClass::cos_odd:
  case MathieuClass::sin_odd: first = 1; break;
  case MathieuClass::sin_even: first = 2; break;
  }
  for (std::size_t k = first; k <= truncation; k += 2) blk.harmonics.push_back(k);
  const auto n = static_cast<Eigen::Index>(blk.harmonics.size());
  blk.matrix = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double k = static_cast<double>(blk.harmonics[i]);
    blk.matrix(i, i) = k * k;
    if (i + 1 < n) {
      const double off = (cls == MathieuClass::cos_even && i == 0) ? std::numbers::sqrt2 * q : q;
      blk.matrix(i, i + 1) = blk.matrix(i + 1, i) = off;
    }
  }
  if (cls == MathieuClass::cos_odd) blk.matrix(0, 0) += q;
  if (cls == MathieuClass::sin_odd) blk.matrix(0, 0) -= q;
  return blk;
}

} // namespace detail

/// Solves the four banded symmetric eigenproblems (even/odd harmonics of the
/// cosine and sine classes) truncated at harmonic `truncation`.
inline MathieuBasis mathieu_basis(double q, std::size_t order_max, std::size_t truncation) {
  using detail::MathieuClass;
  if (!(q >= 0.0)) throw InvalidInput("mathieu_basis: q must be non-negative");
  if (truncation < order_max + 4)
    throw InvalidInput("mathieu_basis: truncation must exceed order_max by at least 4");

  MathieuBasis out;
  out.q = q;
  out.order_max = order_max;
  out.truncation = truncation;
  out.char_a.resize(order_max + 1);
  out.ce.resize(order_max + 1);
  out.char_b.resize(order_max);
  out.se.resize(order_max);

  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  for (auto cls : {MathieuClass::cos_even, MathieuClass::cos_odd, MathieuClass::sin_even,
                   MathieuClass::sin_odd}) {
    const auto blk = detail::mathieu_block(cls, q, truncation);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.matrix);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("mathieu_basis: eigen-decomposition failed", 0.0);

    const bool is_cos = cls == MathieuClass::cos_even || cls == MathieuClass::cos_odd;
    const std::size_t parity = (cls == MathieuClass::cos_odd || cls == MathieuClass::sin_odd);
    for (Eigen::Index m = 0; m < es.eigenvalues().size(); ++m) {
      // order n: cos_even 2m, cos_odd 2m+1, sin_even 2m+2, sin_odd 2m+1
      const std::size_t n = is_cos ? 2 * m + parity : 2 * m + 2 - parity;
      if (n > order_max) break;

      Eigen::VectorXd v = es.eigenvectors().col(m);
      const double vmax = v.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > 1e-12 * vmax) {
          if (v(i) < 0.0) v = -v;
          break;
        }
      const double mu = es.eigenvalues()(m);
      out.max_residual = std::max(out.max_residual, (blk.matrix * v - mu * v).norm());

      std::vector<double> coeffs(truncation + 1, 0.0);
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const std::size_t k = blk.harmonics[i];
        coeffs[k] = v(i) * ((is_cos && k == 0) ? inv_sqrt_2pi : inv_sqrt_pi);
      }
      if (is_cos) {
        out.char_a[n] = mu;
        out.ce[n] = std::move(coeffs);
      } else {
        out.char_b[n - 1] = mu;
        out.se[n - 1] = std::move(coeffs);
      }
    }
  }
  for (double v : out.char_a)
    if (!std::isfinite(v)) throw NumericalFailure("mathieu_basis: non-finite eigenvalue", v);
  for (double v : out.char_b)
    if (!std::isfinite(v)) throw NumericalFailure("mathieu_basis: non-finite eigenvalue", v);
  return out;
}

/// Truncation that resolves orders up to order_max at parameter q to double
/// precision.
inline std::size_t mathieu_default_truncation(double q, std::size_t order_max) {
  return order_max + 16 + static_cast<std::size_t>(std::ceil(12.0 * std::pow(q, 0.25)));
}

} // namespace hypodiff

#endif
