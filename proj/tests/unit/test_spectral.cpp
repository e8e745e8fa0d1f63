#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mckv/spectral/basis.hpp"
#include "mckv/spectral/io.hpp"
#include "mckv/spectral/ops.hpp"
#include "test_util.hpp"

using namespace mckv;
using mckv::testutil::random_field;

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
}

TEST(Basis, TauValues) {
  EXPECT_DOUBLE_EQ(basis_tau(ModeIndex::of({0}), {0.37, 0, 0}), 1.0);
  EXPECT_NEAR(basis_tau(ModeIndex::of({1}), {0.0, 0, 0}), kSqrt2, 1e-15);
  EXPECT_NEAR(basis_tau(ModeIndex::of({-1}), {0.25, 0, 0}), -kSqrt2, 1e-15);
  // product structure in d = 2
  const Point x{0.1, 0.3, 0};
  EXPECT_NEAR(basis_tau(ModeIndex::of({2, -1}), x),
              kSqrt2 * std::cos(kTwoPi * 2 * 0.1) * kSqrt2 * std::sin(-kTwoPi * 0.3), 1e-14);
}

TEST(Basis, CountDim) {
  EXPECT_EQ(count_dim(4, 1), 8);
  EXPECT_EQ(count_dim(1, 2), 4);
  EXPECT_EQ(count_dim(2, 2), 12);
  // brute-force lattice count in d = 3
  int n = 0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) n += (a * a + b * b + c * c <= 4) && (a || b || c);
  EXPECT_EQ(count_dim(2, 3), n);
}

TEST(Basis, ModesAreLexicographic) {
  const auto modes = potential_modes(2, 2);
  for (std::size_t i = 1; i < modes.size(); ++i) EXPECT_LT(modes[i - 1], modes[i]);
}

TEST(Basis, SynthesisMatchesPointwiseTau) {
  const Grid g(2, 16);
  std::mt19937_64 rng(3);
  const PotentialVec w = testutil::random_potential(2, 2, rng);
  const SpectralField f = synthesize(w, g);
  EXPECT_EQ(f.symmetry_defect(), 0.0);
  const auto modes = w.modes();
  for (const Point x : {Point{0.1, 0.7, 0}, Point{0.55, 0.2, 0}}) {
    double direct = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) direct += w.values[static_cast<Eigen::Index>(i)] * basis_tau(modes[i], x);
    EXPECT_NEAR(eval_point(f, x), direct, 1e-13);
  }
  // orthonormality: Euclidean norm equals L2 norm
  EXPECT_NEAR(l2_norm(f), w.values.norm(), 1e-13);
}

TEST(Basis, ProjectionExamples) {
  const Grid g(1, 32);
  const auto modes = potential_modes(3, 1);
  const auto idx = std::find(modes.begin(), modes.end(), ModeIndex::of({1})) - modes.begin();
  const PotentialVec p = project_to_EK(synthesize(PotentialVec::unit(3, 1, idx), g), 3);
  EXPECT_NEAR((p.values - PotentialVec::unit(3, 1, idx).values).norm(), 0.0, 1e-15);
  EXPECT_EQ(project_to_EK(SpectralField::constant(g, 1.0), 3).values.norm(), 0.0);
  EXPECT_THROW(project_to_EK(SpectralField(g), 16), InvalidArgument);
}

TEST(Basis, ProjectSynthesizeRoundTrip) {
  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    const Grid g(d, d == 3 ? 8 : 16);
    const int K = 3;
    const SpectralField f = random_field(g, g.kmax(), rng, 0.7);
    const SpectralField back = synthesize(project_to_EK(f, K), g);
    EXPECT_LT(l2_norm(back - low_pass(f, K, true)), 1e-12) << "d=" << d;
    const PotentialVec w = testutil::random_potential(K, d, rng);
    EXPECT_LT((project_to_EK(synthesize(w, g), K).values - w.values).norm(), 1e-12);
  }
}

TEST(Ops, ConvolutionTheorem) {
  const Grid g(1, 16);
  SpectralField e1(g);
  e1[ModeIndex::of({1})] = 1.0;
  const SpectralField c = convolve(e1, e1);
  EXPECT_EQ(c[ModeIndex::of({1})], cplx(1.0, 0.0));
  EXPECT_EQ(l2_norm(c), 1.0);

  std::mt19937_64 rng(5);
  const SpectralField f = random_field(g, 7, rng, 0.3);
  const SpectralField one = convolve(f, SpectralField::constant(g, 1.0));
  EXPECT_NEAR(l2_norm(one - SpectralField::constant(g, f.mean())), 0.0, 1e-15);
}

TEST(Ops, ConvolutionMatchesQuadrature) {
  // Trapezoidal quadrature on a grid finer than twice the band limit is exact.
  const Grid g(1, 16);
  std::mt19937_64 rng(8);
  const SpectralField f = random_field(g, 7, rng, 0.2);
  const SpectralField h = random_field(g, 7, rng, -0.4);
  const SpectralField c = convolve(f, h);
  const int Q = 64;
  for (const double x : {0.0, 0.13, 0.5, 0.91}) {
    double acc = 0.0;
    for (int j = 0; j < Q; ++j) {
      const double y = static_cast<double>(j) / Q;
      acc += eval_point(f, {x - y, 0, 0}) * eval_point(h, {y, 0, 0});
    }
    EXPECT_NEAR(eval_point(c, {x, 0, 0}), acc / Q, 1e-10);
  }
}

TEST(Ops, DifferentialOperators) {
  const Grid g(2, 16);
  const SpectralField tau = synthesize(PotentialVec::unit(1, 2, 0), g);
  const double k2 = potential_modes(1, 2)[0].norm2();
  SpectralField expected = tau;
  expected *= -kTwoPi * kTwoPi * k2;
  EXPECT_LT(l2_norm(laplacian(tau) - expected), 1e-12);

  std::mt19937_64 rng(2);
  const SpectralField f = random_field(g, 7, rng);
  const SpectralField lap = laplacian(f);
  EXPECT_LT(l2_norm(divergence(gradient(f)) - lap), 1e-12 * l2_norm(lap));
  for (const auto& gj : gradient(f)) EXPECT_EQ(gj.symmetry_defect(), 0.0);
}

TEST(Ops, SobolevNorm) {
  const Grid g(1, 16);
  SpectralField f(g);  // 2 cos(2 pi x)
  f.set_mode(ModeIndex::of({1}), 1.0);
  EXPECT_NEAR(sobolev_norm(f, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(sobolev_norm(f, 0.0), l2_norm(f), 1e-15);
}

TEST(Ops, ParsevalMatchesGridQuadrature) {
  const Grid g(2, 16);
  std::mt19937_64 rng(4);
  const SpectralField f = random_field(g, 7, rng, 1.3);
  const int m = 32;
  const auto v = to_physical(f, m);
  double acc = 0.0;
  for (double x : v) acc += x * x;
  EXPECT_NEAR(sobolev_norm(f, 0.0) * sobolev_norm(f, 0.0), acc / static_cast<double>(v.size()), 1e-10);
}

TEST(Ops, HomogeneousConvolutionInequality) {
  const Grid g(1, 32);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const SpectralField u = random_field(g, 15, rng);
    const SpectralField v = random_field(g, 15, rng);
    const double a = 0.7, b = 1.1;
    EXPECT_LE(sobolev_norm(convolve(u, v), a + b, SobolevWeight::homogeneous),
              sobolev_norm(u, a, SobolevWeight::homogeneous) * sobolev_norm(v, b, SobolevWeight::homogeneous) *
                  (1 + 1e-14));
  }
}

TEST(Ops, PhysicalRoundTripAndDealiasedProduct) {
  const Grid g(1, 16);
  std::mt19937_64 rng(6);
  const SpectralField f = random_field(g, 7, rng, 0.5);
  const int m = padded_size(g, 1.5);
  EXPECT_GE(m, 3 * g.kmax() + 1);
  const SpectralField back = from_physical(to_physical(f, m), m, g);
  EXPECT_LT(l2_norm(back - f), 1e-14);
  EXPECT_EQ(back.symmetry_defect(), 0.0);

  // product of two low modes is represented exactly
  SpectralField c1(g), c2(g);
  c1.set_mode(ModeIndex::of({3}), 0.5);
  c2.set_mode(ModeIndex::of({4}), 0.5);
  const SpectralField p = multiply(c1, c2, m);
  EXPECT_NEAR(p[ModeIndex::of({7})].real(), 0.25, 1e-15);
  EXPECT_NEAR(p[ModeIndex::of({1})].real(), 0.25, 1e-15);
  // aliasing-free: modes beyond kmax are dropped, not folded
  SpectralField h(g);
  h.set_mode(ModeIndex::of({7}), 0.5);
  const SpectralField q = multiply(h, h, m);
  EXPECT_NEAR(q.mean(), 0.5, 1e-15);
  EXPECT_NEAR(l2_norm(q - SpectralField::constant(g, 0.5)), 0.0, 1e-15);
}

TEST(Ops, PointEvaluation) {
  const Grid g(1, 16);
  const SpectralField tau = synthesize(PotentialVec::unit(2, 1, 2), g);  // mode (1)
  EXPECT_EQ(potential_modes(2, 1)[2], ModeIndex::of({1}));
  EXPECT_NEAR(eval_point(tau, {0, 0, 0}), kSqrt2, 1e-15);
  EXPECT_NEAR(eval_point(SpectralField::constant(g, 3.5), {0.42, 0, 0}), 3.5, 1e-15);
}

TEST(Ops, GridMismatchThrows) {
  EXPECT_THROW(convolve(SpectralField(Grid(1, 16)), SpectralField(Grid(1, 32))), GridMismatch);
  EXPECT_THROW(Grid(4, 8), InvalidArgument);
}

TEST(SpectralIo, FieldRoundTrip) {
  const Grid g(2, 8);
  std::mt19937_64 rng(1);
  const SpectralField f = random_field(g, 3, rng, 1.0);
  const auto base = std::filesystem::temp_directory_path() / "mckv_field_rt" / "f";
  write_field(base, f, 3);
  EXPECT_EQ(read_field(base), f);
  std::filesystem::remove_all(base.parent_path());
}
