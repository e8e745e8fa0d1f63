#pragma once

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "mckv/forward/reaction_diffusion.hpp"
#include "mckv/inference/surrogate.hpp"
#include "mckv/sampler/ula.hpp"
#include "mckv/sampler/w2.hpp"
#include "mckv/stability/stability.hpp"

namespace mckv {

/// One measured property with its tolerance.
struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

inline void to_json(nlohmann::json& j, const CheckResult& c) {
  j = {{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}, {"tolerance", c.tolerance}};
  if (!c.detail.empty()) j["detail"] = c.detail;
}

inline double relative_l2l2(const Trajectory& a, const Trajectory& ref) {
  return l2l2_distance(a, ref) / std::max(l2l2_norm(ref), 1e-300);
}

/// Relative L2L2 distance between the M-step and 2M-step versions of the same
/// quantity (the 2M trajectory is subsampled to the M time grid).
template <class Solve>
double self_convergence(const StepperConfig& cfg, Solve&& solve) {
  StepperConfig fine = cfg;
  fine.M = 2 * cfg.M;
  const Trajectory coarse = solve(cfg);
  return relative_l2l2(coarse, subsample(solve(fine), 2));
}

inline Trajectory central_difference(const McKVProblem& p, const PotentialVec& H, double eps) {
  return combine(0.5 / eps, solve_mckv(p.with_W(p.W + eps * H)), -0.5 / eps, solve_mckv(p.with_W(p.W - eps * H)));
}

/// First-derivative check against central differences at eps = 1e-2, 1e-3.
struct FirstDerivativeCheck {
  double err_coarse = 0.0;  ///< eps = 1e-2
  double err_fine = 0.0;    ///< eps = 1e-3
  double slope = 0.0;       ///< log10(err_coarse / err_fine)
  double floor = 0.0;       ///< solver self-convergence of D rho[H]
  double tolerance = 0.0;   ///< 1e-4 + 10 floor
  bool passed = false;
};

inline FirstDerivativeCheck first_derivative_check(const McKVProblem& p, const PotentialVec& H) {
  FirstDerivativeCheck c;
  const Trajectory rho = solve_mckv(p);
  const Trajectory lin = mckv_first_derivative(p, H, rho);
  c.err_coarse = relative_l2l2(central_difference(p, H, 1e-2), lin);
  c.err_fine = relative_l2l2(central_difference(p, H, 1e-3), lin);
  c.slope = std::log10(c.err_coarse / c.err_fine);
  c.floor = self_convergence(p.stepper, [&](const StepperConfig& s) {
    McKVProblem q = p;
    q.stepper = s;
    return mckv_first_derivative(q, H, solve_mckv(q));
  });
  c.tolerance = 1e-4 + 10.0 * c.floor;
  c.passed = c.err_fine <= c.tolerance && std::abs(c.slope - 2.0) <= 0.3;
  return c;
}

struct SecondDerivativeCheck {
  double symmetry = 0.0;  ///< relative ||D2[H1,H2] - D2[H2,H1]||
  double fd_error = 0.0;  ///< vs central differences of D rho[H1] in direction H2
  bool passed = false;
};

inline SecondDerivativeCheck second_derivative_check(const McKVProblem& p, const PotentialVec& H1,
                                                     const PotentialVec& H2, double eps = 1e-3) {
  SecondDerivativeCheck c;
  const Trajectory rho = solve_mckv(p);
  const Trajectory d1 = mckv_first_derivative(p, H1, rho), d2 = mckv_first_derivative(p, H2, rho);
  const Trajectory a = mckv_second_derivative(p, H1, H2, rho, d1, d2);
  const Trajectory b = mckv_second_derivative(p, H2, H1, rho, d2, d1);
  c.symmetry = relative_l2l2(a, b);
  auto first_at = [&](double s) {
    const McKVProblem q = p.with_W(p.W + s * H2);
    return mckv_first_derivative(q, H1, solve_mckv(q));
  };
  c.fd_error = relative_l2l2(combine(0.5 / eps, first_at(eps), -0.5 / eps, first_at(-eps)), a);
  c.passed = c.symmetry <= 1e-10 && c.fd_error <= 1e-3;
  return c;
}

/// Reaction-diffusion linearisation check for R = sin, H = cos; R_eps = sin + eps cos.
struct RdCheck {
  double err_coarse = 0.0, err_fine = 0.0, slope = 0.0, floor = 0.0, tolerance = 0.0;
  double linear_exact_error = 0.0;  ///< R = lambda u vs e^{lambda t} heat(phi)
  bool passed = false;
};

inline ReactionSpec sine_reaction(double eps = 0.0) {
  ReactionSpec r;
  r.R = [eps](double u) { return std::sin(u) + eps * std::cos(u); };
  r.dR = [eps](double u) { return std::cos(u) - eps * std::sin(u); };
  return r;
}

inline SpectralField heat_evolution(const SpectralField& u0, double t) {
  SpectralField out = u0;
  auto c = out.data();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::exp(-kTwoPi * kTwoPi * u0.grid().mode(i).norm2() * t);
  return out;
}

inline RdCheck rd_linearisation_check(const SpectralField& phi, double T, const StepperConfig& cfg,
                                      double rate = 0.7) {
  RdCheck c;
  const ScalarFn H = [](double u) { return std::cos(u); };
  auto lin_at = [&](const StepperConfig& s) { return rd_linearisation(sine_reaction(), H, solve_rd(sine_reaction(), phi, T, s), s); };
  const Trajectory lin = lin_at(cfg);
  auto fd = [&](double eps) {
    return combine(0.5 / eps, solve_rd(sine_reaction(eps), phi, T, cfg), -0.5 / eps,
                   solve_rd(sine_reaction(-eps), phi, T, cfg));
  };
  c.err_coarse = relative_l2l2(fd(1e-2), lin);
  c.err_fine = relative_l2l2(fd(1e-3), lin);
  c.slope = std::log10(c.err_coarse / c.err_fine);
  c.floor = self_convergence(cfg, lin_at);
  c.tolerance = 1e-4 + c.floor;
  ReactionSpec linear;
  linear.linear_rate = rate;
  const Trajectory u = solve_rd(linear, phi, T, cfg);
  for (int m = 0; m <= u.M; ++m) {
    SpectralField exact = heat_evolution(phi, u.time(m));
    exact *= std::exp(rate * u.time(m));
    c.linear_exact_error = std::max(c.linear_exact_error, l2_norm(u.nodes[static_cast<std::size_t>(m)] - exact) / l2_norm(exact));
  }
  c.passed = c.err_fine <= c.tolerance && std::abs(c.slope - 2.0) <= 0.3 && c.linear_exact_error <= 1e-8;
  return c;
}

/// Pseudo-linearisation residual (independently discretised linear PDE) vs
/// the self-convergence of the direct difference rho_{W2} - rho_{W1}.
struct PseudoLinCheck {
  double residual = 0.0, floor = 0.0;
  bool passed = false;
};

inline PseudoLinCheck pseudo_linearisation_check(const McKVProblem& p1, const McKVProblem& p2) {
  PseudoLinCheck c;
  c.residual = pseudo_linearised_difference(p1, p2, StageCoupling::nodal).residual;
  c.floor = self_convergence(p1.stepper, [&](const StepperConfig& s) {
    McKVProblem a = p1, b = p2;
    a.stepper = b.stepper = s;
    return combine(1.0, solve_mckv(b), -1.0, solve_mckv(a));
  });
  c.passed = c.residual <= 5.0 * c.floor;
  return c;
}

/// Random potential scaled so that ||W||_{W^{2,inf}} <= bound.
inline PotentialVec random_potential_w2inf(int K, int d, const Grid& g, std::mt19937_64& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PotentialVec w(K, d);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.values[i] = u(rng);
  const double nrm = sup_sobolev_norm(synthesize(w, g), 2);
  if (nrm > bound) w.values *= bound / nrm;
  return w;
}

inline PotentialVec random_potential_uniform(int K, int d, std::mt19937_64& rng, double a = 1.0) {
  std::uniform_real_distribution<double> u(-a, a);
  PotentialVec w(K, d);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.values[i] = u(rng);
  return w;
}

/// Per-coordinate central-difference check of grad l_N.
struct LikelihoodGradientCheck {
  Eigen::VectorXd analytic, fd, rel;
  double worst = 0.0;
  bool passed = false;
};

inline LikelihoodGradientCheck likelihood_gradient_check(const McKVProblem& p, const Dataset& data,
                                                         double eps = 1e-3, double tol = 1e-3) {
  LikelihoodGradientCheck c;
  c.analytic = grad_log_likelihood(p, data).values;
  c.fd.resize(c.analytic.size());
  c.rel.resize(c.analytic.size());
  for (Eigen::Index k = 0; k < c.analytic.size(); ++k) {
    const PotentialVec e = PotentialVec::unit(p.W.K, p.W.d, k);
    c.fd[k] = (log_likelihood(p.with_W(p.W + eps * e), data) - log_likelihood(p.with_W(p.W - eps * e), data)) /
              (2.0 * eps);
    c.rel[k] = std::abs(c.fd[k] - c.analytic[k]) / std::max(std::abs(c.fd[k]), 1e-300);
  }
  c.worst = c.rel.maxCoeff();
  c.passed = c.worst <= tol;
  return c;
}

/// Monte-Carlo check of the expected negative Hessian against single-datum
/// draws (t, X) ~ U, Y = rho_{W0}(t, X) + noise.
struct HessianMcCheck {
  Eigen::MatrixXd expected, mc, se;
  double worst_z = 0.0;  ///< max |mc - expected| / se over entries
  bool passed = false;
};

inline HessianMcCheck expected_hessian_mc_check(const McKVProblem& p, const McKVProblem& truth, int draws,
                                                std::uint64_t seed, double noise_std = 1.0) {
  HessianMcCheck c;
  c.expected = expected_neg_hessian(p, truth.W);
  const Dataset data = generate_data(truth, draws, noise_std, seed);
  const Trajectory rho = solve_mckv(p);
  const DesignCache cache(data, rho);
  const Jacobian J = jacobian_matrix(p, rho);
  const SecondDerivatives S = second_derivatives(p, rho, J);
  const Eigen::VectorXd r = residuals(data, cache, rho);
  const Eigen::Index D = J.dim();
  std::vector<Eigen::VectorXd> g;
  for (const auto& col : J.columns) g.push_back(cache.evaluate(col));
  c.mc.resize(D, D);
  c.se.resize(D, D);
  const double n = draws;
  for (Eigen::Index j = 0; j < D; ++j)
    for (Eigen::Index k = j; k < D; ++k) {
      const Eigen::ArrayXd s = g[static_cast<std::size_t>(j)].array() * g[static_cast<std::size_t>(k)].array() -
                               r.array() * cache.evaluate(S.at(j, k)).array();
      const double mean = s.mean();
      c.mc(j, k) = c.mc(k, j) = mean;
      c.se(j, k) = c.se(k, j) = std::sqrt((s - mean).square().sum() / (n - 1.0) / n);
      c.worst_z = std::max(c.worst_z, std::abs(mean - c.expected(j, k)) / c.se(j, k));
    }
  c.passed = c.worst_z <= 4.0;
  return c;
}

inline double min_eigenvalue(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Surrogate properties: exactness on the r/2 ball, convex nondecreasing
/// tail penalty, quadratic-branch values, gradient vs FD in the annulus.
struct SurrogateCheck {
  double exactness_max_diff = 0.0;  ///< max |l~ - l| over probes (must be 0)
  int probes = 0;
  double min_second_difference = 0.0;
  double gamma_tilde_at_5r8 = 0.0, gamma_tilde_at_9r8 = 0.0;
  double annulus_worst_rel = 0.0;
  bool passed = false;
};

inline SurrogateCheck surrogate_check(const McKVProblem& base, const Dataset& data, const SurrogateSpec& s,
                                      int probes, std::uint64_t seed, bool gradient_fd = true) {
  SurrogateCheck c;
  const TailPenalty tail(s.r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto on_sphere = [&](double radius) {
    PotentialVec u(s.W_init.K, s.W_init.d);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.values[i] = n01(rng);
    u.values *= radius / u.values.norm();
    return s.W_init + u;
  };
  const DesignCache cache(data, solve_mckv(base.with_W(s.W_init)));
  c.probes = probes;
  for (int i = 0; i < probes; ++i) {
    const McKVProblem p = base.with_W(on_sphere(0.5 * s.r * u01(rng)));
    const double a = surrogate_loglik(p, data, s, tail, &cache).value;
    const double b = evaluate_log_likelihood(p, data, false, &cache).value;
    c.exactness_max_diff = std::max(c.exactness_max_diff, std::abs(a - b));
  }
  const double h = 1e-3 * s.r;
  c.min_second_difference = std::numeric_limits<double>::infinity();
  for (double t = 0.625 * s.r; t <= 3.0 * s.r; t += 0.01 * s.r) {
    const double v0 = s.lambda * tail.value(t - h), v1 = s.lambda * tail.value(t), v2 = s.lambda * tail.value(t + h);
    c.min_second_difference = std::min({c.min_second_difference, v0 - 2.0 * v1 + v2, v2 - v1});
  }
  c.gamma_tilde_at_5r8 = gamma_tilde(5.0 * s.r / 8.0, s.r);
  c.gamma_tilde_at_9r8 = gamma_tilde(9.0 * s.r / 8.0, s.r);
  if (gradient_fd) {
    for (double frac : {0.55, 0.7, 0.8, 0.86}) {
      const McKVProblem p = base.with_W(on_sphere(frac * s.r));
      const Eigen::VectorXd g = surrogate_loglik(p, data, s, tail, &cache).gradient;
      const double eps = 1e-5 * s.r;
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        const PotentialVec e = PotentialVec::unit(s.W_init.K, s.W_init.d, k);
        const double fd = (surrogate_loglik(p.with_W(p.W + eps * e), data, s, tail, &cache).value -
                           surrogate_loglik(p.with_W(p.W - eps * e), data, s, tail, &cache).value) / (2.0 * eps);
        c.annulus_worst_rel = std::max(c.annulus_worst_rel, std::abs(fd - g[k]) / std::max(std::abs(fd), 1e-3));
      }
    }
  }
  c.passed = c.exactness_max_diff == 0.0 && c.min_second_difference >= -1e-10 && c.gamma_tilde_at_5r8 == 0.0 &&
             c.gamma_tilde_at_9r8 == s.r * s.r / 4.0 && c.annulus_worst_rel <= 1e-3;
  return c;
}

/// ULA on the prior-only Gaussian target: per-mode stationary variance vs
/// sigma^2 / (1 - gamma / (2 sigma^2)), in AR(1)-corrected standard errors.
struct GaussianUlaCheck {
  Eigen::VectorXd empirical, predicted, z;
  double worst_z = 0.0;
  double seconds = 0.0;
  bool passed = false;
};

inline GaussianUlaCheck gaussian_ula_check(const PriorSpec& prior, double gamma, int kept, std::uint64_t seed,
                                           double z_tol = 5.0) {
  GaussianUlaCheck c;
  const auto start = std::chrono::steady_clock::now();
  const Eigen::VectorXd prec = prior.precision();
  const double slowest = prec.minCoeff() * gamma;  // contraction rate of the slowest mode
  const int burn = static_cast<int>(std::ceil(20.0 / slowest));
  const ChainRun run = run_ula(PotentialVec(prior.K, prior.d), gamma, kept + burn, burn, 1, seed, gaussian_target(prec));
  const Eigen::Index D = prior.dim();
  c.empirical.resize(D);
  c.predicted.resize(D);
  c.z.resize(D);
  std::vector<double> sq(run.samples.size());
  for (Eigen::Index j = 0; j < D; ++j) {
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = run.samples[i].values[j] * run.samples[i].values[j];
    double m = 0.0;
    for (double v : sq) m += v;
    m /= static_cast<double>(sq.size());
    c.empirical[j] = m;
    c.predicted[j] = ula_gaussian_variance(1.0 / prec[j], gamma);
    c.z[j] = std::abs(m - c.predicted[j]) / ar1_standard_error(sq);
  }
  c.worst_z = c.z.maxCoeff();
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.passed = c.worst_z <= z_tol;
  return c;
}

}  // namespace mckv
