#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>

#include "mckv/stability/stability.hpp"
#include "test_util.hpp"

using namespace mckv;
using mckv::testutil::random_potential;

namespace {

McKVProblem problem(int K = 2, int M = 64, std::uint64_t seed = 1, double scale = 1.0) {
  const Grid g(1, 32);
  McKVProblem p;
  p.phi = power_decay_density(g, 0.5, 2.0);
  std::mt19937_64 rng(seed);
  p.W = random_potential(K, 1, rng, scale);
  p.stepper.M = M;
  return p;
}

// Smallest singular value of the Jacobian computed without forming the Gram
// matrix: factor the piecewise-linear time mass matrix and take an SVD of
// the weighted snapshot matrix.
double sigma_min_by_svd(const Jacobian& J) {
  const Trajectory& c0 = J.columns.front();
  const int M = c0.M;
  const double h = c0.dt();
  Eigen::MatrixXd Mt = Eigen::MatrixXd::Zero(M + 1, M + 1);
  for (int m = 0; m < M; ++m) {
    Mt(m, m) += h / 3;
    Mt(m + 1, m + 1) += h / 3;
    Mt(m, m + 1) += h / 6;
    Mt(m + 1, m) += h / 6;
  }
  const Eigen::MatrixXd Lt = Mt.llt().matrixL().transpose();
  const std::size_t S = c0.nodes[0].size();
  Eigen::MatrixXd A(static_cast<Eigen::Index>((M + 1) * 2 * S), J.dim());
  for (Eigen::Index j = 0; j < J.dim(); ++j) {
    Eigen::MatrixXd X(M + 1, 2 * S);
    for (int m = 0; m <= M; ++m) {
      const auto c = J.columns[j].nodes[m].data();
      for (std::size_t i = 0; i < S; ++i) {
        X(m, 2 * i) = c[i].real();
        X(m, 2 * i + 1) = c[i].imag();
      }
    }
    const Eigen::MatrixXd Y = Lt * X;
    A.col(j) = Eigen::Map<const Eigen::VectorXd>(Y.data(), Y.size());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues().minCoeff();
}

}  // namespace

TEST(PseudoLinearisation, TrivialCases) {
  const McKVProblem p = problem();
  const auto same = pseudo_linearised_difference(p, p);
  EXPECT_EQ(l2l2_norm(same.v), 0.0);
  EXPECT_EQ(same.residual, 0.0);

  McKVProblem u1 = p, u2 = problem(2, 64, 5);
  u1.phi = u2.phi = uniform_density(p.grid());
  const auto flat = pseudo_linearised_difference(u1, u2);
  EXPECT_LT(l2l2_norm(flat.v), 1e-14);
  EXPECT_LT(l2l2_norm(flat.direct), 1e-14);
}

TEST(PseudoLinearisation, ConsistentCouplingReproducesDifferenceExactly) {
  const auto r = pseudo_linearised_difference(problem(2, 64, 1), problem(2, 64, 2), StageCoupling::consistent);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(PseudoLinearisation, NodalResidualShrinksAtSecondOrder) {
  auto residual = [](int M) {
    return pseudo_linearised_difference(problem(2, M, 1), problem(2, M, 2)).residual;
  };
  const double r1 = residual(128), r2 = residual(256), r3 = residual(512);
  EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.3);
  EXPECT_NEAR(std::log2(r2 / r3), 2.0, 0.3);
}

TEST(Deconvolution, UniformStateHasZeroMargin) {
  McKVProblem p = problem();
  p.phi = uniform_density(p.grid());
  EXPECT_EQ(deconvolution_margin(solve_mckv(p), 3, 2.0).value, 0.0);
}

TEST(Deconvolution, InitialMarginEqualsDecayConstant) {
  const McKVProblem p = problem();
  const Trajectory rho = solve_mckv(p);
  const auto dm = deconvolution_margin(rho, 4, 2.0, 1e-9);
  EXPECT_EQ(dm.t0, 1e-9);
  EXPECT_NEAR(dm.value, 0.5, 1e-15);
  EXPECT_NEAR(dm.c_star, 0.5, 1e-15);
}

TEST(Deconvolution, HeatCaseClosedForm) {
  McKVProblem p = problem();
  p.W = PotentialVec(2, 1);
  const Trajectory rho = solve_mckv(p);
  const int K = 3;
  const auto dm = deconvolution_margin(rho, K, 2.0);
  EXPECT_GT(dm.C_hat, 0.0);
  EXPECT_NEAR(dm.t0, std::min(p.T, 0.5 * std::pow(K, -2.0) / (2 * dm.C_hat)), 1e-15);
  const int last = static_cast<int>(std::floor(dm.t0 / rho.dt() + 1e-12));
  const double t = rho.time(last);
  EXPECT_NEAR(dm.value, 0.5 * std::exp(-kTwoPi * kTwoPi * K * K * t), 1e-13);
}

TEST(Deconvolution, ZeroIffSomeModeVanishes) {
  McKVProblem p = problem();
  p.W = PotentialVec(2, 1);
  p.phi.set_mode(ModeIndex::of({2}), 0.0);
  EXPECT_EQ(deconvolution_margin(solve_mckv(p), 3, 2.0).value, 0.0);
  EXPECT_GT(deconvolution_margin(solve_mckv(problem()), 3, 2.0).value, 0.0);
}

TEST(GradientStability, UniformStateIsDegenerate) {
  McKVProblem p = problem();
  p.phi = uniform_density(p.grid());
  EXPECT_EQ(gradient_stability_sigma_min(p).sigma_min, 0.0);
}

TEST(GradientStability, PositiveAndMatchesSvd) {
  const McKVProblem p = problem(2, 32);
  const Trajectory rho = solve_mckv(p);
  const auto gs = gradient_stability_sigma_min(p, rho);
  EXPECT_GT(gs.sigma_min, 0.0);
  const double svd = sigma_min_by_svd(jacobian_matrix(p, rho));
  EXPECT_NEAR(gs.sigma_min * gs.sigma_min, svd * svd, 1e-10);
  EXPECT_NEAR(gs.sigma_min, svd, 1e-8 * svd);
}

TEST(GradientStability, NestedBasesDoNotIncreaseSigmaMin) {
  const McKVProblem p = problem(2, 32);
  McKVProblem q = p;
  q.W = embed(p.W, 4);
  const double s2 = gradient_stability_sigma_min(p).sigma_min;
  const double s4 = gradient_stability_sigma_min(q).sigma_min;
  EXPECT_LE(s4, s2 * (1 + 1e-12));
  EXPECT_EQ(l2l2_distance(solve_mckv(p), solve_mckv(q)), 0.0);
}

TEST(Lipschitz, Probe) {
  const McKVProblem p = problem();
  EXPECT_THROW(forward_lipschitz_probe(p, p, 6.0), InvalidArgument);

  McKVProblem u1 = p, u2 = problem(2, 64, 9);
  u1.phi = u2.phi = uniform_density(p.grid());
  EXPECT_EQ(forward_lipschitz_probe(u1, u2, 6.0), 0.0);

  const PotentialVec e1 = PotentialVec::unit(2, 1, 2);  // mode (1)
  const double beta = 6.0;
  auto ratio = [&](double eps) { return forward_lipschitz_probe(p, p.with_W(p.W + eps * e1), beta); };
  const double r2 = ratio(1e-2), r3 = ratio(1e-3);
  EXPECT_NEAR(r2 / r3, 1.0, 0.2);
  const Trajectory rho = solve_mckv(p);
  const double limit = l2l2_norm(mckv_first_derivative(p, e1, rho)) /
                       sobolev_norm(synthesize(e1, p.grid()), -(beta + 1));
  EXPECT_NEAR(ratio(1e-5) / limit, 1.0, 1e-4);
}

TEST(StabilityReport, JsonRoundTrip) {
  StabilityReport r{0.1, 0.2, 0.3, 0.4};
  EXPECT_TRUE(r.valid());
  const nlohmann::json j = r;
  const auto back = j.get<StabilityReport>();
  EXPECT_EQ(back.sigma_min, 0.1);
  EXPECT_EQ(back.pseudo_lin_residual, 0.4);
  r.decon_margin = -1.0;
  EXPECT_FALSE(r.valid());
}
