#include <gtest/gtest.h>

#include <cmath>

#include "hypodiff/grid.hpp"

using namespace hypodiff;

TEST(Image2D, RejectsInconsistentConstruction) {
  EXPECT_THROW(Image2D(3, 3, Spacing{1, 1}, std::vector<double>(8)), InvalidInput);
  EXPECT_THROW(Image2D(3, 3, Spacing{0, 1}), InvalidInput);
  EXPECT_THROW(Image2D(2, 1, Spacing{1, 1}, std::vector<double>{1.0, NAN}), InvalidInput);
}

TEST(Image2D, SampleUsesPixelSpacing) {
  const auto img = Image2D::sample(4, 3, {0.5, 2.0}, 1.0, -1.0, [](double x, double y) { return x + 10 * y; });
  EXPECT_DOUBLE_EQ(img(2, 1), 2.0 + 10 * 1.0);
  EXPECT_DOUBLE_EQ(img(3, 2), 2.5 + 10 * 3.0);
}

TEST(AngleGrid, ValidatesPeriodAndSize) {
  EXPECT_THROW(AngleGrid(3, std::numbers::pi), InvalidInput);
  EXPECT_THROW(AngleGrid(8, 1.0), InvalidInput);
  const AngleGrid g(8, 2 * std::numbers::pi);
  EXPECT_FALSE(g.is_projective());
  EXPECT_DOUBLE_EQ(g.node(2), std::numbers::pi / 2);
}

TEST(Frequency, WrapAroundConvention) {
  EXPECT_EQ(signed_bin(0, 8), 0);
  EXPECT_EQ(signed_bin(3, 8), 3);
  EXPECT_EQ(signed_bin(5, 8), -3);
  EXPECT_DOUBLE_EQ(frequency(6, 8, 0.5), -2.0 / 4.0);
}

TEST(WrapAngle, ReducesIntoHalfOpenPeriod) {
  const double p = std::numbers::pi;
  EXPECT_DOUBLE_EQ(wrap_angle(-0.25, p), p - 0.25);
  EXPECT_NEAR(wrap_angle(3 * p + 0.1, p), 0.1, 1e-12);
  EXPECT_LT(wrap_angle(p, p), p);
}

TEST(LiftedField, ThetaFastestLayout) {
  LiftedField v(3, 2, {}, AngleGrid(4, std::numbers::pi));
  v(2, 1, 3) = 7.0;
  EXPECT_EQ(v.data()[(1 * 3 + 2) * 4 + 3], 7.0);
  EXPECT_EQ(v.fiber(2, 1)[3], 7.0);
}

TEST(Gradient, ExactOnQuadraticsIncludingBoundary) {
  const auto f = Image2D::sample(7, 6, {0.3, 0.2}, 0.0, 0.0,
                                 [](double x, double y) { return 1 + 2 * x - y + x * x + 3 * x * y - 2 * y * y; });
  const auto g = gradient(f);
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 7; ++i) {
      const double x = 0.3 * i, y = 0.2 * j;
      EXPECT_NEAR(g.dx(i, j), 2 + 2 * x + 3 * y, 1e-11);
      EXPECT_NEAR(g.dy(i, j), -1 + 3 * x - 4 * y, 1e-11);
    }
}

// Richardson check: halving h reduces the interior error by about 4.
TEST(Gradient, SecondOrderConvergence) {
  const auto err = [](double h) {
    const std::size_t n = static_cast<std::size_t>(std::lround(1.0 / h)) + 1;
    const auto f = Image2D::sample(n, n, {h, h}, 0.0, 0.0, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
    const auto g = gradient(f);
    const std::size_t i = n / 2, j = n / 2;
    const double x = h * i, y = h * j;
    return std::abs(g.dx(i, j) - 3 * std::cos(3 * x) * std::cos(2 * y));
  };
  const double ratio = err(0.02) / err(0.01);
  EXPECT_NEAR(ratio, 4.0, 0.1);
}

TEST(Hessian, ExactOnQuadratics) {
  const auto f = Image2D::sample(6, 6, {0.5, 0.25}, 0.0, 0.0,
                                 [](double x, double y) { return x * x + 3 * x * y - 2 * y * y; });
  const auto h = hessian(f);
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_NEAR(h.dxx(i, j), 2.0, 1e-10);
      EXPECT_NEAR(h.dxy(i, j), 3.0, 1e-10);
      EXPECT_NEAR(h.dyy(i, j), -4.0, 1e-10);
    }
}

TEST(Gradient, RejectsTinyImages) { EXPECT_THROW(gradient(Image2D(2, 5)), InvalidInput); }
