#ifndef HYPODIFF_KERNEL_HPP
#define HYPODIFF_KERNEL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dft.hpp"
#include "mathieu.hpp"
#include "quadrature.hpp"
#include "se2.hpp"

namespace hypodiff {

/// Truncation of the spectral formula for the SE(2) heat kernel.
struct KernelQuadrature {
  double lambda_max = 0.0;      ///< upper limit of the lambda integral
  std::size_t n_lambda = 200;   ///< Gauss-Legendre nodes on [0, lambda_max]
  std::size_t n_max = 20;       ///< highest Mathieu order
  std::size_t n_alpha = 256;    ///< trapezoid nodes for the inner products on S^1

  /// The slowest term decays like exp(-beta lambda t) at large lambda, since
  /// a_0(q) ~ -2 q + 2 sqrt(q) cancels the -lambda^2 / 2.
  static KernelQuadrature defaults_for(double t, double beta = 1.0) {
    if (!(t > 0.0)) throw InvalidInput("KernelQuadrature: t must be positive");
    if (!(beta > 0.0)) throw InvalidInput("KernelQuadrature: beta must be positive");
    return {40.0 / std::min(std::sqrt(t), beta * t), 200, 20, 256};
  }

  KernelQuadrature refined(double factor = 2.0) const {
    return {lambda_max * factor, static_cast<std::size_t>(n_lambda * factor),
            static_cast<std::size_t>(n_max * factor), static_cast<std::size_t>(n_alpha * factor)};
  }

  void validate() const {
    if (!(lambda_max > 0.0)) throw InvalidInput("KernelQuadrature: lambda_max must be positive");
    if (n_lambda < 1 || n_max < 1 || n_alpha < 1)
      throw InvalidInput("KernelQuadrature: counts must be >= 1");
  }
};

/// Applies the unitary representation of g on L^2(S^1):
///   (X(g) psi)(alpha) = exp(i lambda (x cos alpha - y sin alpha)) psi(alpha + theta),
/// with psi sampled on uniform nodes alpha_j = 2 pi j / n. Off-grid shifts use
/// trigonometric interpolation.
inline std::vector<Complex> representation_apply(const Se2 &g, double lambda,
                                                 std::span<const Complex> psi) {
  const std::size_t n = psi.size();
  if (n == 0) return {};
  std::vector<Complex> buf(psi.begin(), psi.end());
  detail::dft2_many(buf, n, 1, 1, FFTW_FORWARD);
  for (std::size_t k = 0; k < n; ++k) {
    if (n % 2 == 0 && k == n / 2)
      buf[k] *= std::cos(0.5 * static_cast<double>(n) * g.theta);
    else
      buf[k] *= std::polar(1.0, static_cast<double>(signed_bin(k, n)) * g.theta);
  }
  detail::dft2_many(buf, n, 1, 1, FFTW_BACKWARD);
  for (std::size_t j = 0; j < n; ++j) {
    const double alpha = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    const double phase = lambda * (g.x * std::cos(alpha) - g.y * std::sin(alpha));
    buf[j] *= std::polar(1.0 / static_cast<double>(n), phase);
  }
  return buf;
}

struct KernelValue {
  double value = 0.0;
  double imaginary = 0.0; ///< imaginary part left by truncation
  double abs_sum = 0.0;   ///< sum of |contributions|, the scale for `imaginary`
};

/// Spectral evaluation of the hypoelliptic heat kernel of
/// d_t = (cos d_x + sin d_y)^2 + beta^2 d_theta^2 on SE(2):
///
///   p_t(g) = C int_0^inf lambda sum_n exp(E_n(lambda) t) <psi_n, X(g) psi_n> dlambda
///
/// over the Mathieu functions psi_n in {ce_n, se_n} at q = lambda^2 / (4 beta^2),
/// with E = -lambda^2 / 2 - beta^2 a_n(q) (resp. b_n) and C = kPlancherel.
/// Mathieu bases at the lambda nodes are built once per instance.
class Se2HeatKernel {
public:
  /// Normalization for unit-L^2 Mathieu functions and the Haar measure
  /// dx dy dtheta; pinned by the grid-diffusion regression test.
  static constexpr double kPlancherel = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

  Se2HeatKernel(double t, KernelQuadrature quad, double beta = 1.0)
      : t_(t), quad_(quad), beta_(beta) {
    if (!(t > 0.0)) throw InvalidInput("heat kernel: t must be positive");
    if (!(beta > 0.0)) throw InvalidInput("heat kernel: beta must be positive");
    quad_.validate();
    build();
  }

  double time() const noexcept { return t_; }

  /// Full evaluation with truncation diagnostics. Throws NumericalFailure when
  /// the imaginary residue exceeds 1e-6 of the contribution scale.
  KernelValue evaluate(const Se2 &g) const {
    const std::size_t na = quad_.n_alpha;
    const double dalpha = 2.0 * std::numbers::pi / static_cast<double>(na);
    std::vector<double> cos_k_theta(max_harmonic_ + 1), sin_k_theta(max_harmonic_ + 1);
    for (std::size_t k = 0; k <= max_harmonic_; ++k) {
      cos_k_theta[k] = std::cos(static_cast<double>(k) * g.theta);
      sin_k_theta[k] = std::sin(static_cast<double>(k) * g.theta);
    }
    std::vector<double> shifted(na);
    std::vector<Complex> phase(na);

    Complex total{};
    double abs_sum = 0.0;
    for (const auto &node : nodes_) {
      for (std::size_t j = 0; j < na; ++j)
        phase[j] = std::polar(dalpha, -node.lambda * (g.x * cos_alpha_[j] - g.y * sin_alpha_[j]));
      Complex inner_sum{};
      for (const auto &fn : node.functions) {
        // psi(alpha + theta) from the Fourier coefficients.
        std::fill(shifted.begin(), shifted.end(), 0.0);
        for (std::size_t k = 0; k < fn.coeffs.size(); ++k) {
          const double c = fn.coeffs[k];
          if (c == 0.0) continue;
          const double *ck = &cos_table_[k * na];
          const double *sk = &sin_table_[k * na];
          if (fn.is_cos) {
            const double a = c * cos_k_theta[k], b = -c * sin_k_theta[k];
            for (std::size_t j = 0; j < na; ++j) shifted[j] += a * ck[j] + b * sk[j];
          } else {
            const double a = c * cos_k_theta[k], b = c * sin_k_theta[k];
            for (std::size_t j = 0; j < na; ++j) shifted[j] += a * sk[j] + b * ck[j];
          }
        }
        Complex inner{};
        for (std::size_t j = 0; j < na; ++j) inner += fn.samples[j] * shifted[j] * phase[j];
        const Complex contrib = node.weight * fn.decay * inner;
        inner_sum += contrib;
        abs_sum += std::abs(contrib);
      }
      total += inner_sum;
    }
    KernelValue out{kPlancherel * total.real(), kPlancherel * total.imag(), kPlancherel * abs_sum};
    if (std::abs(out.imaginary) > 1e-6 * std::max(std::abs(out.value), out.abs_sum * 1e-3))
      throw NumericalFailure("heat kernel: imaginary residue too large",
                             std::abs(out.imaginary) / std::max(std::abs(out.value), 1e-300));
    return out;
  }

  double operator()(const Se2 &g) const { return evaluate(g).value; }

  /// Kernel on PT R^2: p(gb^-1 g) + p(gb^-1 g Pi).
  double ptr2(const Se2 &g, const Se2 &gbar) const {
    const Se2 rel = gbar.inverse() * g;
    return (*this)(rel) + (*this)(rel * Se2::half_turn());
  }

private:
  struct Function {
    bool is_cos = true;
    double decay = 0.0;          // exp(E t)
    std::vector<double> coeffs;  // Fourier coefficients
    std::vector<double> samples; // values at alpha_j
  };
  struct Node {
    double lambda = 0.0;
    double weight = 0.0; // quadrature weight times lambda
    std::vector<Function> functions;
  };

  void build() {
    const std::size_t na = quad_.n_alpha;
    cos_alpha_.resize(na);
    sin_alpha_.resize(na);
    for (std::size_t j = 0; j < na; ++j) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(na);
      cos_alpha_[j] = std::cos(a);
      sin_alpha_[j] = std::sin(a);
    }
    // Terms below exp(-60) of unity cannot affect a double-precision result.
    constexpr double kNegligible = 60.0;
    const QuadratureRule rule = gauss_legendre(quad_.n_lambda, 0.0, quad_.lambda_max);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double lambda = rule.nodes[i];
      const double q = lambda * lambda / (4.0 * beta_ * beta_);
      const MathieuBasis basis =
          mathieu_basis(q, quad_.n_max, mathieu_default_truncation(q, quad_.n_max));
      Node node{lambda, rule.weights[i] * lambda, {}};
      const auto add = [&](bool is_cos, double characteristic, const std::vector<double> &c) {
        const double exponent = (-lambda * lambda / 2.0 - beta_ * beta_ * characteristic) * t_;
        if (exponent < -kNegligible) return;
        Function fn{is_cos, std::exp(exponent), c, std::vector<double>(na)};
        for (std::size_t j = 0; j < na; ++j) {
          const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(na);
          fn.samples[j] = is_cos ? MathieuBasis::eval_cos_series(c, a)
                                 : MathieuBasis::eval_sin_series(c, a);
        }
        max_harmonic_ = std::max(max_harmonic_, c.size() - 1);
        node.functions.push_back(std::move(fn));
      };
      for (std::size_t n = 0; n <= quad_.n_max; ++n) add(true, basis.a(n), basis.ce_coeffs(n));
      for (std::size_t n = 1; n <= quad_.n_max; ++n) add(false, basis.b(n), basis.se_coeffs(n));
      if (!node.functions.empty()) nodes_.push_back(std::move(node));
    }
    cos_table_.assign((max_harmonic_ + 1) * na, 0.0);
    sin_table_.assign((max_harmonic_ + 1) * na, 0.0);
    for (std::size_t k = 0; k <= max_harmonic_; ++k)
      for (std::size_t j = 0; j < na; ++j) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(na);
        cos_table_[k * na + j] = std::cos(static_cast<double>(k) * a);
        sin_table_[k * na + j] = std::sin(static_cast<double>(k) * a);
      }
  }

  double t_;
  KernelQuadrature quad_;
  double beta_;
  std::size_t max_harmonic_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> cos_alpha_, sin_alpha_;
  std::vector<double> cos_table_, sin_table_; // [k * n_alpha + j]
};

/// p_t(g) on SE(2) (beta = 1).
inline double heat_kernel_se2(const Se2 &g, double t, const KernelQuadrature &quad) {
  return Se2HeatKernel(t, quad)(g);
}

/// P_t(g, gbar) on PT R^2; both theta coordinates are taken mod pi.
inline double heat_kernel_ptr2(const Se2 &g, const Se2 &gbar, double t,
                               const KernelQuadrature &quad) {
  return Se2HeatKernel(t, quad).ptr2(g, gbar);
}

} // namespace hypodiff

#endif
