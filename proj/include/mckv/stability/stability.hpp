#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "mckv/forward/densities.hpp"
#include "mckv/forward/mckv.hpp"

namespace mckv {

/// Result of the averaged-coefficient linear solve for rho_{W2} - rho_{W1}.
struct PseudoLinearisation {
  Trajectory v;       ///< solution of the averaged-coefficient linear PDE
  Trajectory direct;  ///< rho_{W2} - rho_{W1}
  double residual = 0.0;  ///< ||v - direct|| / ||direct|| (0 when direct == 0)
};

/// Solves
///   dv/dt - Lap v - div(v grad W2 * rho_bar) - div(rho_bar grad W2 * v)
///     = div(rho_1 grad (W2 - W1) * rho_1),   v(0) = 0,
/// with rho_bar = (rho_1 + rho_2) / 2, and compares v with rho_2 - rho_1.
///
/// With StageCoupling::consistent the identity holds for the discrete scheme
/// up to roundoff; StageCoupling::nodal discretises the linear PDE
/// independently, so the residual measures time-discretisation error.
inline PseudoLinearisation pseudo_linearised_difference(const McKVProblem& p1, const McKVProblem& p2,
                                                        StageCoupling coupling = StageCoupling::nodal) {
  require_same_grid(p1.grid(), p2.grid(), "pseudo_linearised_difference");
  if (p1.phi != p2.phi || p1.T != p2.T || p1.stepper.M != p2.stepper.M)
    throw InvalidArgument("pseudo_linearised_difference: problems must share phi, T and M");
  const Grid& g = p1.grid();
  const Trajectory rho1 = solve_mckv(p1);
  const Trajectory rho2 = solve_mckv(p2);
  const Trajectory rho_bar = combine(0.5, rho1, 0.5, rho2);
  const SpectralField W2 = synthesize(p2.W, g);
  const SpectralField dW = W2 - synthesize(p1.W, g);
  const int m_pad = padded_size(g, p2.stepper.pad);
  const Trajectory forcing = detail::forcing_trajectory(rho1, [&](bool st, std::size_t i) {
    const auto& r = detail::pick(rho1, st, i);
    return trilinear_T(r, dW, r, m_pad);
  });

  PseudoLinearisation out;
  out.v = solve_linear_LW(W2, rho_bar, &forcing, SpectralField(g), p2.stepper, coupling);
  out.direct = combine(1.0, rho2, -1.0, rho1);
  const double nd = l2l2_norm(out.direct);
  const double nr = l2l2_distance(out.v, out.direct);
  out.residual = nd > 0.0 ? nr / nd : nr;
  return out;
}

/// max over steps of ||(rho_{m+1} - rho_m) / dt||_{L^1}, L^1 by grid quadrature.
inline double time_derivative_l1_bound(const Trajectory& rho) {
  const int m = padded_size(rho.grid(), 2.0);
  double best = 0.0;
  for (int s = 0; s < rho.M; ++s) {
    SpectralField diff = rho.nodes[static_cast<std::size_t>(s + 1)] - rho.nodes[static_cast<std::size_t>(s)];
    const auto v = to_physical(diff, m);
    double acc = 0.0;
    for (double x : v) acc += std::abs(x);
    best = std::max(best, acc / static_cast<double>(v.size()) / rho.dt());
  }
  return best;
}

struct DeconvolutionMargin {
  double value = 0.0;   ///< min |rho^(t,k)| |k|^zeta over the window
  double t0 = 0.0;      ///< window end
  double c_star = 0.0;  ///< min |phi_k| |k|^zeta for 0 < |k| <= K
  double C_hat = 0.0;   ///< empirical L^1 Lipschitz constant of t -> rho(t)
};

/// min over 0 < |k| <= K and stored t_m <= t0 of |rho^(t_m, k)| |k|^zeta.
/// By default t0 = min(T, c_* K^{-zeta} / (2 C_hat)), with c_* read off rho(0)
/// and C_hat from time_derivative_l1_bound; a positive `t0_override` replaces it.
inline DeconvolutionMargin deconvolution_margin(const Trajectory& rho, int K, double zeta,
                                                double t0_override = -1.0) {
  if (K < 1) throw InvalidArgument("deconvolution_margin: K must be >= 1");
  DeconvolutionMargin out;
  out.c_star = decay_constant(rho.nodes.front(), K, zeta);
  out.C_hat = time_derivative_l1_bound(rho);
  if (t0_override > 0.0) {
    out.t0 = std::min(rho.T, t0_override);
  } else if (out.C_hat > 0.0) {
    out.t0 = std::min(rho.T, out.c_star * std::pow(K, -zeta) / (2.0 * out.C_hat));
  } else {
    out.t0 = rho.T;
  }
  const auto modes = rho.grid().resolved_modes();
  double best = std::numeric_limits<double>::infinity();
  const double eps = 1e-12 * rho.dt();
  for (int m = 0; m <= rho.M && rho.time(m) <= out.t0 + eps; ++m)
    for (const auto& k : modes)
      if (!k.is_zero() && k.norm2() <= K * K)
        best = std::min(best, std::abs(rho.nodes[static_cast<std::size_t>(m)][k]) * std::pow(k.norm(), zeta));
  out.value = std::isfinite(best) ? best : 0.0;
  return out;
}

struct GradientStability {
  double sigma_min = 0.0;
  Eigen::MatrixXd gram;      ///< <D rho[tau_j], D rho[tau_k]>_{L2L2}
  Eigen::VectorXd eigenvalues;  ///< ascending
};

/// Smallest singular value of H -> D rho_W[H] from (E_K, L^2) to
/// L^2([0,T]; L^2), as sqrt of the smallest Gram eigenvalue.
inline GradientStability gradient_stability_sigma_min(const McKVProblem& p, const Trajectory& rho) {
  GradientStability out;
  out.gram = gram_matrix(jacobian_matrix(p, rho));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.gram, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  out.sigma_min = std::sqrt(std::max(0.0, out.eigenvalues(0)));
  return out;
}

inline GradientStability gradient_stability_sigma_min(const McKVProblem& p) {
  return gradient_stability_sigma_min(p, solve_mckv(p));
}

/// ||rho_{W2} - rho_{W1}||_{L2L2} / ||W2 - W1||_{H^{-(beta+1)}}.
inline double forward_lipschitz_probe(const McKVProblem& p1, const McKVProblem& p2, double beta) {
  if (p1.phi != p2.phi) throw InvalidArgument("forward_lipschitz_probe: problems must share phi");
  const PotentialVec dW = p2.W - p1.W;
  const double den = sobolev_norm(synthesize(dW, p1.grid()), -(beta + 1.0));
  if (!(den > 0.0)) throw InvalidArgument("forward_lipschitz_probe: W1 == W2, ratio undefined");
  return l2l2_distance(solve_mckv(p2), solve_mckv(p1)) / den;
}

struct StabilityReport {
  double sigma_min = 0.0;
  double decon_margin = 0.0;
  double lipschitz_ratio = 0.0;
  double pseudo_lin_residual = 0.0;

  bool valid() const {
    for (double v : {sigma_min, decon_margin, lipschitz_ratio, pseudo_lin_residual})
      if (!std::isfinite(v) || v < 0.0) return false;
    return true;
  }
};

inline void to_json(nlohmann::json& j, const StabilityReport& r) {
  j = nlohmann::json{{"sigma_min", r.sigma_min},
                     {"decon_margin", r.decon_margin},
                     {"lipschitz_ratio", r.lipschitz_ratio},
                     {"pseudo_lin_residual", r.pseudo_lin_residual}};
}

inline void from_json(const nlohmann::json& j, StabilityReport& r) {
  r.sigma_min = j.at("sigma_min").get<double>();
  r.decon_margin = j.at("decon_margin").get<double>();
  r.lipschitz_ratio = j.at("lipschitz_ratio").get<double>();
  r.pseudo_lin_residual = j.at("pseudo_lin_residual").get<double>();
}

}  // namespace mckv
