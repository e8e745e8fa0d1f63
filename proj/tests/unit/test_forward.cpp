#include <gtest/gtest.h>

#include <cmath>

#include "mckv/forward/densities.hpp"
#include "mckv/forward/mckv.hpp"
#include "mckv/forward/reaction_diffusion.hpp"
#include "test_util.hpp"

using namespace mckv;
using mckv::testutil::random_field;
using mckv::testutil::random_potential;

namespace {

SpectralField heat(const SpectralField& u0, double t) {
  SpectralField out = u0;
  auto c = out.data();
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] *= std::exp(-kTwoPi * kTwoPi * u0.grid().mode(i).norm2() * t);
  return out;
}

McKVProblem problem(int n = 32, int K = 3, int M = 64, std::uint64_t seed = 1) {
  const Grid g(1, n);
  McKVProblem p;
  p.phi = power_decay_density(g, 0.5, 2.0);
  std::mt19937_64 rng(seed);
  p.W = random_potential(K, 1, rng);
  p.T = 0.5;
  p.stepper.M = M;
  return p;
}

Trajectory central_difference(const McKVProblem& p, const PotentialVec& H, double eps) {
  return combine(0.5 / eps, solve_mckv(p.with_W(p.W + eps * H)), -0.5 / eps,
                 solve_mckv(p.with_W(p.W - eps * H)));
}

}  // namespace

TEST(Trilinear, Examples) {
  const Grid g(1, 16);
  std::mt19937_64 rng(2);
  const SpectralField r = random_field(g, 7, rng, 1.0);
  const SpectralField s = random_field(g, 7, rng, 0.3);
  const SpectralField V = synthesize(random_potential(3, 1, rng), g);
  EXPECT_EQ(l2_norm(trilinear_T(r, SpectralField(g), s)), 0.0);
  EXPECT_LT(l2_norm(trilinear_T(r, V, SpectralField::constant(g, 1.0))), 1e-14);
  // r == 1: coefficients -4 pi^2 |k|^2 V_k s_k
  const SpectralField t = trilinear_T(SpectralField::constant(g, 1.0), V, s);
  for (const auto& k : g.resolved_modes()) {
    const cplx expect = -kTwoPi * kTwoPi * k.norm2() * V[k] * s[k];
    EXPECT_NEAR(std::abs(t[k] - expect), 0.0, 1e-12) << k.str();
  }
  EXPECT_THROW(trilinear_T(r, V, SpectralField(Grid(1, 8))), GridMismatch);
}

TEST(Trilinear, IsTrilinear) {
  const Grid g(2, 12);
  std::mt19937_64 rng(3);
  const SpectralField r1 = random_field(g, 5, rng), r2 = random_field(g, 5, rng);
  const SpectralField s = random_field(g, 5, rng, 1.0);
  const SpectralField V = synthesize(random_potential(2, 2, rng), g);
  const SpectralField lhs = trilinear_T(2.0 * r1 + r2, V, s);
  const SpectralField rhs = 2.0 * trilinear_T(r1, V, s) + trilinear_T(r2, V, s);
  EXPECT_LT(l2_norm(lhs - rhs), 1e-12 * l2_norm(lhs));
}

TEST(McKV, ValidatesProblem) {
  McKVProblem p = problem();
  p.phi[ModeIndex::of({0})] = 0.9;
  EXPECT_THROW(solve_mckv(p), InvalidArgument);
  p = problem();
  p.W = PotentialVec(20, 1);
  EXPECT_THROW(solve_mckv(p), InvalidArgument);
  p = problem();
  p.W = PotentialVec(2, 2);
  EXPECT_THROW(solve_mckv(p), GridMismatch);
}

TEST(McKV, ZeroPotentialIsHeat) {
  McKVProblem p = problem();
  p.W = PotentialVec(3, 1);
  const Trajectory rho = solve_mckv(p);
  for (int m = 0; m <= rho.M; ++m) EXPECT_LT(l2_norm(rho.nodes[m] - heat(p.phi, rho.time(m))), 1e-12);
}

TEST(McKV, UniformStateIsSteady) {
  McKVProblem p = problem();
  p.phi = uniform_density(p.grid());
  const Trajectory rho = solve_mckv(p);
  for (const auto& n : rho.nodes) EXPECT_LT(l2_norm(n - p.phi), 1e-14);
}

TEST(McKV, MassConservedEveryStep) {
  for (int d = 1; d <= 2; ++d) {
    const Grid g(d, 16);
    McKVProblem p;
    std::mt19937_64 rng(4);
    p.phi = random_field(g, 7, rng, 1.0, 0.1);
    p.W = random_potential(2, d, rng);
    p.stepper.M = 32;
    const Trajectory rho = solve_mckv(p);
    for (const auto& n : rho.nodes) EXPECT_NEAR(n.mean(), 1.0, 1e-12);
    for (const auto& n : rho.stages) EXPECT_NEAR(n.mean(), 1.0, 1e-12);
  }
}

TEST(McKV, ConstantShiftOfPotentialIsInvisible) {
  const McKVProblem p = problem();
  const SpectralField W = synthesize(p.W, p.grid());
  const SpectralField shifted = W + SpectralField::constant(p.grid(), 3.0);
  const Trajectory a = solve_mckv_field(W, p.phi, p.T, p.stepper);
  const Trajectory b = solve_mckv_field(shifted, p.phi, p.T, p.stepper);
  EXPECT_LT(l2l2_distance(a, b), 1e-14);
  // and projecting the shifted potential recovers the same coordinates
  EXPECT_LT((project_to_EK(shifted, p.W.K).values - p.W.values).norm(), 1e-14);
}

TEST(FirstDerivative, TrivialCases) {
  McKVProblem p = problem();
  const Trajectory rho = solve_mckv(p);
  const Trajectory z = mckv_first_derivative(p, PotentialVec(3, 1), rho);
  EXPECT_EQ(l2l2_norm(z), 0.0);
  p.phi = uniform_density(p.grid());
  const Trajectory rho1 = solve_mckv(p);
  std::mt19937_64 rng(9);
  EXPECT_LT(l2l2_norm(mckv_first_derivative(p, random_potential(3, 1, rng), rho1)), 1e-14);
}

TEST(FirstDerivative, LinearInDirectionAndMassFree) {
  const McKVProblem p = problem();
  const Trajectory rho = solve_mckv(p);
  std::mt19937_64 rng(5);
  const PotentialVec H1 = random_potential(3, 1, rng), H2 = random_potential(3, 1, rng);
  const Trajectory d1 = mckv_first_derivative(p, H1, rho);
  const Trajectory d2 = mckv_first_derivative(p, H2, rho);
  const Trajectory d12 = mckv_first_derivative(p, 2.0 * H1 + (-0.5) * H2, rho);
  EXPECT_LT(l2l2_distance(d12, combine(2.0, d1, -0.5, d2)), 1e-10 * l2l2_norm(d12));
  for (const auto& n : d1.nodes) EXPECT_NEAR(n.mean(), 0.0, 1e-15);
}

TEST(FirstDerivative, MatchesCentralDifferences) {
  const McKVProblem p = problem(32, 3, 64, 7);
  const Trajectory rho = solve_mckv(p);
  std::mt19937_64 rng(6);
  const PotentialVec H = random_potential(3, 1, rng);
  const Trajectory d = mckv_first_derivative(p, H, rho);
  const double e2 = l2l2_distance(central_difference(p, H, 1e-2), d) / l2l2_norm(d);
  const double e3 = l2l2_distance(central_difference(p, H, 1e-3), d) / l2l2_norm(d);
  EXPECT_LT(e3, 1e-4);
  EXPECT_NEAR(std::log10(e2 / e3), 2.0, 0.3);
}

TEST(SecondDerivative, SymmetricBilinearAndMatchesDifferences) {
  const McKVProblem p = problem(32, 2, 64, 8);
  const Trajectory rho = solve_mckv(p);
  std::mt19937_64 rng(7);
  const PotentialVec H1 = random_potential(2, 1, rng), H2 = random_potential(2, 1, rng);
  const Trajectory d1 = mckv_first_derivative(p, H1, rho);
  const Trajectory d2 = mckv_first_derivative(p, H2, rho);
  const Trajectory s12 = mckv_second_derivative(p, H1, H2, rho, d1, d2);
  const Trajectory s21 = mckv_second_derivative(p, H2, H1, rho, d2, d1);
  EXPECT_LE(l2l2_distance(s12, s21), 1e-10 * l2l2_norm(s12));
  const Trajectory zero = mckv_second_derivative(p, PotentialVec(2, 1), H2, rho, zeros_like(rho), d2);
  EXPECT_EQ(l2l2_norm(zero), 0.0);

  const double eps = 1e-3;
  const McKVProblem pp = p.with_W(p.W + eps * H2), pm = p.with_W(p.W - eps * H2);
  const Trajectory fd = combine(0.5 / eps, mckv_first_derivative(pp, H1, solve_mckv(pp)), -0.5 / eps,
                                mckv_first_derivative(pm, H1, solve_mckv(pm)));
  EXPECT_LT(l2l2_distance(fd, s12) / l2l2_norm(s12), 1e-3);
}

TEST(Jacobian, ColumnsAndGram) {
  const McKVProblem p = problem(32, 2, 32, 3);
  const Trajectory rho = solve_mckv(p);
  const Jacobian J = jacobian_matrix(p, rho);
  ASSERT_EQ(J.dim(), 4);
  for (Eigen::Index i = 0; i < J.dim(); ++i) {
    const Trajectory col = mckv_first_derivative(p, PotentialVec::unit(2, 1, i), rho);
    for (std::size_t m = 0; m < col.nodes.size(); ++m) EXPECT_EQ(col.nodes[m], J.columns[i].nodes[m]);
  }
  const Eigen::MatrixXd G = gram_matrix(J);
  EXPECT_EQ((G - G.transpose()).norm(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  EXPECT_GT(es.eigenvalues()(0), 0.0);

  McKVProblem u = p;
  u.phi = uniform_density(p.grid());
  EXPECT_LT(gram_matrix(jacobian_matrix(u, solve_mckv(u))).norm(), 1e-28);
}

TEST(Densities, PowerDecay) {
  const Grid g(1, 64);
  const SpectralField phi = power_decay_density(g, 0.5, 2.0);
  EXPECT_EQ(phi.mean(), 1.0);
  EXPECT_NEAR(phi[ModeIndex::of({2})].real(), 0.125, 1e-16);
  EXPECT_GT(min_value(phi), 0.15);
  EXPECT_NEAR(decay_constant(phi, 5, 2.0), 0.5, 1e-15);
  EXPECT_THROW(power_decay_density(g, 2.0, 0.5), DomainError);
}

// --- reaction-diffusion -------------------------------------------------

namespace {
ReactionSpec sine_reaction(double eps = 0.0) {
  ReactionSpec r;
  r.R = [eps](double u) { return std::sin(u) + eps * std::cos(u); };
  r.dR = [eps](double u) { return std::cos(u) - eps * std::sin(u); };
  return r;
}
}  // namespace

TEST(ReactionDiffusion, ZeroReactionIsHeat) {
  const Grid g(1, 32);
  std::mt19937_64 rng(1);
  const SpectralField phi = random_field(g, 10, rng, 0.5);
  StepperConfig cfg;
  cfg.M = 64;
  const Trajectory u = solve_rd(ReactionSpec{}, phi, 0.5, cfg);
  for (int m = 0; m <= u.M; ++m) EXPECT_LT(l2_norm(u.nodes[m] - heat(phi, u.time(m))), 1e-12);
}

TEST(ReactionDiffusion, LinearRateIsExact) {
  const Grid g(2, 16);
  std::mt19937_64 rng(2);
  const SpectralField phi = random_field(g, 7, rng, 0.5);
  ReactionSpec r;
  r.linear_rate = 1.3;
  StepperConfig cfg;
  cfg.M = 64;
  const Trajectory u = solve_rd(r, phi, 0.5, cfg);
  for (int m = 0; m <= u.M; ++m) {
    SpectralField exact = heat(phi, u.time(m));
    exact *= std::exp(1.3 * u.time(m));
    EXPECT_LT(l2_norm(u.nodes[m] - exact), 1e-12 * l2_norm(exact));
  }
}

TEST(ReactionDiffusion, LinearReactionThroughNonlinearPathConverges) {
  const Grid g(1, 16);
  std::mt19937_64 rng(3);
  const SpectralField phi = random_field(g, 7, rng, 0.5);
  ReactionSpec r;
  r.R = [](double u) { return u; };
  r.dR = [](double) { return 1.0; };
  auto err = [&](int M) {
    StepperConfig cfg;
    cfg.M = M;
    const Trajectory u = solve_rd(r, phi, 0.5, cfg);
    SpectralField exact = heat(phi, 0.5);
    exact *= std::exp(0.5);
    return l2_norm(u.nodes.back() - exact);
  };
  EXPECT_NEAR(std::log2(err(64) / err(128)), 2.0, 0.1);
}

TEST(ReactionDiffusion, SpecValidation) {
  ReactionSpec bad = sine_reaction();
  bad.dR = [](double u) { return std::sin(u); };
  EXPECT_THROW(bad.validate(), InvalidArgument);
  ReactionSpec half;
  half.R = [](double u) { return u; };
  EXPECT_THROW(half.validate(), InvalidArgument);

  ReactionSpec bounded = sine_reaction();
  bounded.lo = -0.1;
  bounded.hi = 0.1;
  const Grid g(1, 16);
  StepperConfig cfg;
  cfg.M = 8;
  EXPECT_THROW(solve_rd(bounded, SpectralField::constant(g, 1.0), 0.5, cfg), DomainError);
}

TEST(ReactionDiffusion, LinearisationMatchesCentralDifferences) {
  const Grid g(1, 32);
  std::mt19937_64 rng(4);
  const SpectralField phi = random_field(g, 10, rng, 0.5, 2.0);
  StepperConfig cfg;
  cfg.M = 64;
  const ScalarFn H = [](double u) { return std::cos(u); };
  const Trajectory u = solve_rd(sine_reaction(), phi, 0.5, cfg);
  const Trajectory i = rd_linearisation(sine_reaction(), H, u, cfg);
  double errs[2];
  int j = 0;
  for (double eps : {1e-2, 1e-3}) {
    const Trajectory fd = combine(0.5 / eps, solve_rd(sine_reaction(eps), phi, 0.5, cfg), -0.5 / eps,
                                  solve_rd(sine_reaction(-eps), phi, 0.5, cfg));
    errs[j++] = l2l2_distance(fd, i) / l2l2_norm(i);
  }
  EXPECT_LT(errs[1], 1e-4);
  EXPECT_NEAR(std::log10(errs[0] / errs[1]), 2.0, 0.3);
  EXPECT_EQ(l2_norm(i.nodes[0]), 0.0);
}
