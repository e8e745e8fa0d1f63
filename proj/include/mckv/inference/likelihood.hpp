#pragma once

#include <optional>

#include "mckv/forward/mckv.hpp"
#include "mckv/inference/data.hpp"
#include "mckv/inference/prior.hpp"

namespace mckv {

/// ell_N(W) = -1/2 sum_i |Y_i - rho_W(t_i, X_i)|^2 and, optionally, its
/// gradient sum_i r_i [D rho_W[tau_k](t_i, X_i)]_k with r_i the residuals.
struct LikelihoodEval {
  double value = 0.0;
  Eigen::VectorXd residuals;
  std::optional<Eigen::VectorXd> gradient;
};

inline Eigen::VectorXd residuals(const Dataset& data, const DesignCache& cache, const Trajectory& rho) {
  return Eigen::Map<const Eigen::VectorXd>(data.Y.data(), static_cast<Eigen::Index>(data.N())) -
         cache.evaluate(rho);
}

/// Gradient for fixed residuals: linear in r.
inline Eigen::VectorXd gradient_from_residuals(const Jacobian& J, const DesignCache& cache,
                                               const Eigen::VectorXd& r) {
  const auto A = cache.adjoint(r);
  Eigen::VectorXd g(J.dim());
  for (Eigen::Index k = 0; k < J.dim(); ++k) g[k] = cache.apply(J.columns[static_cast<std::size_t>(k)], A);
  return g;
}

/// One forward solve, plus D linearised solves when the gradient is requested.
/// `cache`, when given, must have been built for this dataset and time grid.
inline LikelihoodEval evaluate_log_likelihood(const McKVProblem& p, const Dataset& data, bool with_gradient,
                                              const DesignCache* cache = nullptr) {
  if (data.d != p.grid().d) throw GridMismatch("log_likelihood: dataset dimension differs");
  const Trajectory rho = solve_mckv(p);
  std::optional<DesignCache> local;
  if (!cache) cache = &local.emplace(data, rho);
  LikelihoodEval out;
  out.residuals = residuals(data, *cache, rho);
  out.value = -0.5 * out.residuals.squaredNorm();
  if (with_gradient) out.gradient = gradient_from_residuals(jacobian_matrix(p, rho), *cache, out.residuals);
  return out;
}

inline double log_likelihood(const McKVProblem& p, const Dataset& data) {
  return evaluate_log_likelihood(p, data, false).value;
}

inline PotentialVec grad_log_likelihood(const McKVProblem& p, const Dataset& data) {
  return PotentialVec(p.W.K, p.W.d, *evaluate_log_likelihood(p, data, true).gradient);
}

/// H(W) = -ell_N(W) + 1/2 W^T Sigma^{-1} W.
inline double posterior_energy(const McKVProblem& p, const Dataset& data, const PriorSpec& prior) {
  return -log_likelihood(p, data) + 0.5 * prior.quadratic(p.W);
}

inline PotentialVec grad_posterior_energy(const McKVProblem& p, const Dataset& data, const PriorSpec& prior) {
  const Eigen::VectorXd g = -*evaluate_log_likelihood(p, data, true).gradient +
                            (prior.precision().array() * p.W.values.array()).matrix();
  return PotentialVec(p.W.K, p.W.d, g);
}

/// Second-derivative trajectories D^2 rho_W[tau_j, tau_k] for j <= k, stored
/// row-major in the upper triangle.
struct SecondDerivatives {
  Eigen::Index D = 0;
  std::vector<Trajectory> upper;

  const Trajectory& at(Eigen::Index j, Eigen::Index k) const {
    if (j > k) std::swap(j, k);
    return upper[static_cast<std::size_t>(j * D - j * (j - 1) / 2 + (k - j))];
  }
};

inline SecondDerivatives second_derivatives(const McKVProblem& p, const Trajectory& rho, const Jacobian& J) {
  SecondDerivatives S;
  S.D = J.dim();
  for (Eigen::Index j = 0; j < S.D; ++j)
    for (Eigen::Index k = j; k < S.D; ++k)
      S.upper.push_back(mckv_second_derivative(p, PotentialVec::unit(p.W.K, p.W.d, j),
                                               PotentialVec::unit(p.W.K, p.W.d, k), rho,
                                               J.columns[static_cast<std::size_t>(j)],
                                               J.columns[static_cast<std::size_t>(k)]));
  return S;
}

/// E_{W0}[-Hess ell(W)] for a single datum (t, X) ~ U([0,T] x T^d):
///   (1/T) [ <D rho_W[tau_j], D rho_W[tau_k]> + <rho_W - rho_{W0}, D^2 rho_W[tau_j, tau_k]> ]
/// with L^2([0,T]; L^2) products of the piecewise-linear-in-time interpolants.
/// The correction term is skipped when rho_W == rho_{W0}.
inline Eigen::MatrixXd expected_neg_hessian(const McKVProblem& p, const PotentialVec& W0) {
  const Trajectory rho = solve_mckv(p);
  const Trajectory rho0 = solve_mckv(p.with_W(W0));
  const Jacobian J = jacobian_matrix(p, rho);
  Eigen::MatrixXd H = gram_matrix(J);
  const Trajectory diff = combine(1.0, rho, -1.0, rho0);
  if (l2l2_norm(diff) > 0.0) {
    const SecondDerivatives S = second_derivatives(p, rho, J);
    for (Eigen::Index j = 0; j < J.dim(); ++j)
      for (Eigen::Index k = j; k < J.dim(); ++k) {
        const double c = l2l2_inner(diff, S.at(j, k));
        H(j, k) += c;
        if (k != j) H(k, j) += c;
      }
  }
  return H / p.T;
}

}  // namespace mckv
