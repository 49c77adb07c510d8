#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hypodiff/evolution.hpp"
#include "oracles.hpp"

using namespace hypodiff;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<Complex> random_profile(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> p(n);
  for (auto &c : p) c = Complex(g(rng), g(rng));
  return p;
}

double rel_err(const std::vector<Complex> &a, const Eigen::VectorXcd &b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b(i));
    den += std::norm(b(i));
  }
  return std::sqrt(num / den);
}

Eigen::VectorXcd as_vector(const std::vector<Complex> &v) {
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Gaussian blob in space times a smooth theta profile on a periodic grid.
LiftedField blob(std::size_t n_space, double h, std::size_t n_theta, double period,
                 double cx = 0.5, double cy = 0.5) {
  LiftedField v(n_space, n_space, {h, h}, AngleGrid(n_theta, period));
  const double L = n_space * h;
  for (std::size_t y = 0; y < n_space; ++y)
    for (std::size_t x = 0; x < n_space; ++x)
      for (std::size_t k = 0; k < n_theta; ++k) {
        const double dx = x * h - cx * L, dy = y * h - cy * L;
        const double th = v.angles().node(k);
        v(x, y, k) = std::exp(-(dx * dx + dy * dy) / (2 * 0.7 * 0.7)) *
                     (1.0 + 0.5 * std::cos(2 * pi / period * th) + 0.2 * std::sin(4 * pi / period * th));
      }
  return v;
}

LiftedField random_field(std::size_t w, std::size_t h, std::size_t n, double period, std::uint64_t seed,
                         Spacing sp = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  LiftedField v(w, h, sp, AngleGrid(n, period));
  for (double &a : v.data()) a = u(rng);
  return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(std::span<const double> a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

} // namespace

TEST(ThetaGenerator, MatchesOperatorDefinition) {
  const AngleGrid grid(16, pi);
  const Eigen::MatrixXd a = theta_generator(FrequencyPoint::plain(0.3, -1.2), 0.7, grid);
  const Eigen::MatrixXcd b = oracle::generator(0.3, -1.2, 0.7, 16, pi);
  EXPECT_LT((a.cast<Complex>() - b).norm(), 1e-12 * b.norm());
}

TEST(ThetaGenerator, NegativeSemidefinite) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const AngleGrid grid(32, trial % 2 ? pi : 2 * pi);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta_generator(FrequencyPoint::plain(u(rng), u(rng)), 0.5 + std::abs(u(rng)), grid));
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
  }
}

TEST(SingleFrequency, AgreesWithPadeExponential) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const bool proj = trial % 2 == 0;
    const AngleGrid grid(24, proj ? pi : 2 * pi);
    EvolutionParams p;
    p.beta = 0.5 + std::abs(u(rng));
    p.time = 0.1 + std::abs(u(rng)) / 2;
    p.mode = proj ? Mode::ptr2 : Mode::se2;
    FrequencySlice s{u(rng), u(rng), random_profile(24, rng)};
    const Eigen::VectorXcd ref =
        oracle::expm(p.time * oracle::generator(s.xi1, s.xi2, p.beta, 24, grid.period())) * as_vector(s.profile);
    EXPECT_LT(rel_err(evolve_single_frequency(s, p, grid).profile, ref), 1e-10);
  }
}

TEST(SingleFrequency, CrankNicolsonIsSecondOrder) {
  std::mt19937_64 rng(2);
  const AngleGrid grid(32, pi);
  FrequencySlice s{0.8, -0.4, random_profile(32, rng)};
  EvolutionParams p;
  p.time = 0.5;
  p.beta = 0.7;
  p.solver = Solver::crank_nicolson;
  const Eigen::VectorXcd ref = oracle::expm(p.time * oracle::generator(0.8, -0.4, 0.7, 32, pi)) * as_vector(s.profile);
  p.n_substeps = 64;
  const double e1 = rel_err(evolve_single_frequency(s, p, grid).profile, ref);
  p.n_substeps = 128;
  const double e2 = rel_err(evolve_single_frequency(s, p, grid).profile, ref);
  EXPECT_NEAR(e1 / e2, 4.0, 0.3);
}

TEST(SingleFrequency, DriftModelConvergesToExponential) {
  std::mt19937_64 rng(4);
  const AngleGrid grid(32, 2 * pi);
  FrequencySlice s{0.6, 0.9, random_profile(32, rng)};
  EvolutionParams p;
  p.mode = Mode::mumford;
  p.time = 0.4;
  p.beta = 0.5;
  p.n_substeps = 512;
  const Eigen::VectorXcd ref =
      oracle::expm(p.time * oracle::generator(0.6, 0.9, 0.5, 32, 2 * pi, true, 1.0)) * as_vector(s.profile);
  EXPECT_LT(rel_err(evolve_single_frequency(s, p, grid).profile, ref), 1e-4);
  p.drift_direction = -1;
  const Eigen::VectorXcd back =
      oracle::expm(p.time * oracle::generator(0.6, 0.9, 0.5, 32, 2 * pi, true, -1.0)) * as_vector(s.profile);
  EXPECT_LT(rel_err(evolve_single_frequency(s, p, grid).profile, back), 1e-4);
}

TEST(SingleFrequency, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(6);
  const AngleGrid grid(16, pi);
  FrequencySlice s{1.0, 2.0, random_profile(16, rng)};
  const auto out = evolve_single_frequency(s, EvolutionParams{}, grid);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(out.profile[k], s.profile[k]);
}

TEST(Evolution, RejectsModeGridMismatch) {
  EvolutionParams p;
  p.mode = Mode::se2;
  EXPECT_THROW(evolve_single_frequency({0, 0, std::vector<Complex>(8)}, p, AngleGrid(8, pi)), InvalidInput);
  p.mode = Mode::ptr2;
  EXPECT_THROW(evolve_field(LiftedField(4, 4, {}, AngleGrid(8, 2 * pi)), p), InvalidInput);
}

// Real-space method of lines for d_t = X1 + beta^2 d_theta^2. Only the
// agreeing sign of the drift multiplier matches it.
TEST(Evolution, DriftSignMatchesRealSpaceSolver) {
  const std::size_t n = 32, nt = 16;
  const double h = 0.25, beta = 0.5, T = 0.5;
  const LiftedField v0 = blob(n, h, nt, 2 * pi);
  const oracle::RealSpaceSolver fd(n, n, nt, h, 2 * pi, beta, true);
  const auto ref = fd.evolve(std::vector<double>(v0.data().begin(), v0.data().end()), T, 0.005);

  EvolutionParams p;
  p.mode = Mode::mumford;
  p.beta = beta;
  p.time = T;
  p.n_substeps = 256;
  const LiftedField plus = evolve_field(v0, p);
  p.drift_direction = -1;
  const LiftedField minus = evolve_field(v0, p);
  const double scale = max_abs(ref);
  EXPECT_LT(max_abs_diff(plus.data(), ref) / scale, 5e-3);
  EXPECT_GT(max_abs_diff(minus.data(), ref) / scale, 0.1);
}

TEST(Evolution, Ptr2MatchesRealSpaceSolver) {
  const std::size_t n = 32, nt = 16;
  const double h = 0.25, beta = 0.5, T = 0.3;
  const LiftedField v0 = blob(n, h, nt, pi);
  const oracle::RealSpaceSolver fd(n, n, nt, h, pi, beta, false);
  const auto ref = fd.evolve(std::vector<double>(v0.data().begin(), v0.data().end()), T, 0.004);
  EvolutionParams p;
  p.beta = beta;
  p.time = T;
  const LiftedField out = evolve_field(v0, p);
  EXPECT_LT(max_abs_diff(out.data(), ref) / max_abs(ref), 5e-3);
}

TEST(Evolution, ConservesMass) {
  for (Mode m : {Mode::ptr2, Mode::se2, Mode::mumford}) {
    const LiftedField v = random_field(20, 16, 16, mode_period(m), 7, {0.5, 0.5});
    EvolutionParams p;
    p.mode = m;
    p.time = 1.0;
    const auto r = evolve_field_with_diagnostics(v, p);
    EXPECT_LT(r.mass_drift, 1e-9) << to_string(m);
    EXPECT_NEAR(oracle::brute_force_sum({r.field.data().begin(), r.field.data().end()}),
                oracle::brute_force_sum({v.data().begin(), v.data().end()}),
                1e-9 * oracle::brute_force_sum({v.data().begin(), v.data().end()}));
  }
}

TEST(Evolution, WeakPositivity) {
  // A one-voxel delta rings under the spectral derivative; a resolved bump does not.
  LiftedField v(32, 32, {}, AngleGrid(16, pi));
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x)
      v(x, y, 3) = std::exp(-(std::pow(x - 16.0, 2) + std::pow(y - 16.0, 2)) / 8.0);
  EvolutionParams p;
  p.time = 0.5;
  const LiftedField out = evolve_field(v, p);
  double mn = 0, mx = 0;
  for (double a : out.data()) {
    mn = std::min(mn, a);
    mx = std::max(mx, a);
  }
  EXPECT_GE(mn, -1e-9 * mx);
}

TEST(Evolution, RealInputGivesRealOutput) {
  const LiftedField v = random_field(16, 12, 8, pi, 3);
  EvolutionParams p;
  p.time = 0.2;
  EXPECT_LT(evolve_field_with_diagnostics(v, p).imaginary_residue, 1e-12);
}

TEST(Evolution, RotationEquivariance) {
  const std::size_t n = 16, nt = 16;
  for (Mode m : {Mode::ptr2, Mode::se2, Mode::mumford}) {
    const double period = mode_period(m);
    const LiftedField v = random_field(n, n, nt, period, 21);
    // Rotation by +90 degrees about the origin of the periodic grid.
    const std::size_t shift = static_cast<std::size_t>(std::lround((pi / 2) / (period / nt)));
    const auto rotate = [&](const LiftedField &a) {
      LiftedField r(n, n, a.spacing(), a.angles());
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t k = 0; k < nt; ++k) r(i, j, (k + shift) % nt) = a(j, (n - i) % n, k);
      return r;
    };
    EvolutionParams p;
    p.mode = m;
    p.time = 0.3;
    p.n_substeps = 16;
    const LiftedField a = rotate(evolve_field(v, p));
    const LiftedField b = evolve_field(rotate(v), p);
    EXPECT_LT(max_abs_diff(a.data(), b.data()), 1e-9) << to_string(m);
  }
}

TEST(Evolution, Ptr2EqualsSe2OnSymmetricData) {
  const std::size_t nt = 16;
  const LiftedField half = random_field(12, 12, nt, pi, 5);
  LiftedField full(12, 12, {}, AngleGrid(2 * nt, 2 * pi));
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 12; ++x)
      for (std::size_t k = 0; k < 2 * nt; ++k) full(x, y, k) = half(x, y, k % nt);
  EvolutionParams p;
  p.time = 0.4;
  p.beta = 0.8;
  const LiftedField a = evolve_field(half, p);
  p.mode = Mode::se2;
  const LiftedField b = evolve_field(full, p);
  double d = 0;
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 12; ++x)
      for (std::size_t k = 0; k < nt; ++k) d = std::max(d, std::abs(a(x, y, k) - b(x, y, k)));
  EXPECT_LT(d, 1e-9);
}

TEST(Symmetrize, Properties) {
  LiftedField v(3, 3, {}, AngleGrid(8, 2 * pi));
  v(1, 1, 2) = 1.0;
  const LiftedField s = symmetrize_se2(v);
  EXPECT_DOUBLE_EQ(s(1, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(s(1, 1, 6), 0.5);
  EXPECT_DOUBLE_EQ(s.sum(), 1.0);
  const LiftedField again = symmetrize_se2(s);
  EXPECT_EQ(max_abs_diff(again.data(), s.data()), 0.0);
  EXPECT_THROW(symmetrize_se2(LiftedField(2, 2, {}, AngleGrid(7, 2 * pi))), InvalidInput);
  EXPECT_THROW(symmetrize_se2(LiftedField(2, 2, {}, AngleGrid(8, pi))), InvalidInput);
}

TEST(Symmetrize, Se2EvolutionPreservesSymmetry) {
  const LiftedField v = symmetrize_se2(random_field(16, 16, 16, 2 * pi, 8));
  EvolutionParams p;
  p.mode = Mode::se2;
  p.time = 0.7;
  const LiftedField out = evolve_field(v, p);
  double d = 0;
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x)
      for (std::size_t k = 0; k < 8; ++k) d = std::max(d, std::abs(out(x, y, k) - out(x, y, k + 8)));
  EXPECT_LT(d, 1e-12);
}

TEST(ProjectMax, MatchesExhaustiveScan) {
  const LiftedField v = random_field(7, 5, 12, pi, 13);
  const Image2D m = project_max(v);
  for (std::size_t y = 0; y < 5; ++y)
    for (std::size_t x = 0; x < 7; ++x) {
      double best = -1;
      for (std::size_t k = 0; k < 12; ++k) best = std::max(best, v(x, y, k));
      EXPECT_EQ(m(x, y), best);
    }
  EXPECT_EQ(project_max(LiftedField(4, 4, {}, AngleGrid(8, pi), 0.3))(2, 2), 0.3);
}
