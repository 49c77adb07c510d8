#include <gtest/gtest.h>

#include <cmath>

#include "hypodiff/mathieu.hpp"

using namespace hypodiff;
constexpr double pi = std::numbers::pi;

namespace {

// y'' + (a - 2 q cos 2x) y = 0 from y(0) = 1, y'(0) = 0 by RK4; returns y'(pi/2).
// Its zeros in a are the characteristic values of the even pi-periodic ce_{2m}.
double shoot_even(double a, double q) {
  const int steps = 4000;
  const double h = (pi / 2) / steps;
  double y = 1, v = 0, x = 0;
  const auto acc = [&](double xx, double yy) { return -(a - 2 * q * std::cos(2 * xx)) * yy; };
  for (int s = 0; s < steps; ++s) {
    const double k1y = v, k1v = acc(x, y);
    const double k2y = v + h / 2 * k1v, k2v = acc(x + h / 2, y + h / 2 * k1y);
    const double k3y = v + h / 2 * k2v, k3v = acc(x + h / 2, y + h / 2 * k2y);
    const double k4y = v + h * k3v, k4v = acc(x + h, y + h * k3y);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x += h;
  }
  return v;
}

double bisect(double lo, double hi, double q) {
  double flo = shoot_even(lo, q);
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi), fm = shoot_even(mid, q);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST(Mathieu, ZeroParameterGivesSquares) {
  const MathieuBasis b = mathieu_basis(0.0, 10, 20);
  for (std::size_t n = 0; n <= 10; ++n) EXPECT_NEAR(b.a(n), double(n * n), 1e-10);
  for (std::size_t n = 1; n <= 10; ++n) EXPECT_NEAR(b.b(n), double(n * n), 1e-10);
}

TEST(Mathieu, CharacteristicValueMatchesShooting) {
  for (double q : {0.5, 1.0, 5.0}) {
    const MathieuBasis b = mathieu_basis(q, 4, mathieu_default_truncation(q, 4));
    EXPECT_NEAR(b.a(0), bisect(b.a(0) - 0.05, b.a(0) + 0.05, q), 1e-9) << q;
    EXPECT_NEAR(b.a(2), bisect(b.a(2) - 0.05, b.a(2) + 0.05, q), 1e-9) << q;
  }
}

TEST(Mathieu, TabulatedValuesAtUnitParameter) {
  const MathieuBasis b = mathieu_basis(1.0, 2, 30);
  EXPECT_NEAR(b.a(0), -0.4551386041, 1e-9);
  EXPECT_NEAR(b.a(1), 1.8591080725, 1e-9);
  EXPECT_NEAR(b.b(1), -0.1102488170, 1e-9);
  EXPECT_NEAR(b.b(2), 3.9170247730, 1e-9);
}

TEST(Mathieu, TruncationDoublingIsStable) {
  const double a16 = mathieu_basis(1.0, 0, 16).a(0);
  const double a32 = mathieu_basis(1.0, 0, 32).a(0);
  EXPECT_LT(std::abs(a16 - a32), 1e-10);
}

TEST(Mathieu, FunctionsAreOrthonormal) {
  const MathieuBasis b = mathieu_basis(3.0, 6, mathieu_default_truncation(3.0, 6));
  const int m = 512;
  const auto inner = [&](auto f, auto g) {
    double s = 0;
    for (int j = 0; j < m; ++j) {
      const double x = 2 * pi * j / m;
      s += f(x) * g(x);
    }
    return s * 2 * pi / m;
  };
  for (std::size_t n = 0; n <= 6; ++n) {
    const auto ce = [&](double x) { return b.ce_at(n, x); };
    EXPECT_NEAR(inner(ce, ce), 1.0, 1e-12);
    if (n >= 1) {
      const auto se = [&](double x) { return b.se_at(n, x); };
      EXPECT_NEAR(inner(se, se), 1.0, 1e-12);
      EXPECT_NEAR(inner(ce, se), 0.0, 1e-12);
    }
    if (n >= 1) {
      const auto prev = [&](double x) { return b.ce_at(n - 1, x); };
      EXPECT_NEAR(inner(ce, prev), 0.0, 1e-12);
    }
  }
}

TEST(Mathieu, SeriesSatisfiesOdePointwise) {
  const double q = 2.0;
  const MathieuBasis b = mathieu_basis(q, 5, mathieu_default_truncation(q, 5));
  for (std::size_t n = 1; n <= 5; ++n)
    for (double x : {0.1, 0.9, 2.3}) {
      const auto &c = b.se_coeffs(n);
      double y = 0, ypp = 0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        y += c[k] * std::sin(k * x);
        ypp -= double(k * k) * c[k] * std::sin(k * x);
      }
      EXPECT_NEAR(ypp + (b.b(n) - 2 * q * std::cos(2 * x)) * y, 0.0, 1e-10);
    }
  EXPECT_LT(b.max_residual, 1e-10);
}

TEST(Mathieu, SignConvention) {
  const MathieuBasis b = mathieu_basis(4.0, 3, 30);
  EXPECT_GT(b.ce_coeffs(0)[0], 0.0);
  EXPECT_GT(b.ce_coeffs(1)[1], 0.0);
  EXPECT_GT(b.se_coeffs(2)[2], 0.0);
}

TEST(Mathieu, RejectsBadArguments) {
  EXPECT_THROW(mathieu_basis(-1.0, 2, 10), InvalidInput);
  EXPECT_THROW(mathieu_basis(1.0, 8, 10), InvalidInput);
}
