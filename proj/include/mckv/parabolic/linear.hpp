#pragma once

#include <optional>

#include "mckv/parabolic/stepper.hpp"
#include "mckv/spectral/basis.hpp"

namespace mckv {

/// How a linear solve reads time-dependent coefficient and forcing
/// trajectories at the second IF-Heun stage.
enum class StageCoupling {
  /// Use the recorded predictor states. The linear solve is then the exact
  /// tangent of the discrete nonlinear scheme.
  consistent,
  /// Use the stored node at t_{m+1}; a plain discretisation of the linear PDE.
  nodal,
};

namespace detail {
inline const SpectralField& coupled_stage(const Trajectory& tr, int m, int s, StageCoupling c) {
  if (c == StageCoupling::nodal) return tr.nodes[static_cast<std::size_t>(m + s)];
  return tr.stage(m, s);
}
}  // namespace detail

/// The nonlocal part of L_W applied to u with coefficient rho:
///   div(u grad(W*rho)) + div(rho grad(W*u)).
inline SpectralField nonlocal_linear_part(const SpectralField& W, const SpectralField& rho,
                                          const SpectralField& u, int m) {
  const VectorField a = gradient(convolve(W, rho));
  const VectorField b = gradient(convolve(W, u));
  return flux_divergence({{u, a}, {rho, b}}, m);
}

/// Solves (d/dt - L_W) u = f, u(0) = u0 on the time grid of `rho`, where
///   L_W u = Lap u + div(u grad W * rho) + div(rho grad W * u).
/// `forcing` may be omitted (f = 0). The result is linear in (f, u0).
inline Trajectory solve_linear_LW(const SpectralField& W, const Trajectory& rho,
                                  const Trajectory* forcing, const SpectralField& u0,
                                  const StepperConfig& cfg,
                                  StageCoupling coupling = StageCoupling::consistent) {
  cfg.validate();
  if (rho.M != cfg.M) throw GridMismatch("solve_linear_LW: rho_traj and stepper step counts differ");
  require_same_grid(W.grid(), rho.grid(), "solve_linear_LW");
  require_same_grid(u0.grid(), rho.grid(), "solve_linear_LW");
  if (forcing) forcing->check_compatible(rho, "solve_linear_LW");
  const int m_pad = padded_size(rho.grid(), cfg.pad);

  const StageRhs rhs = [&](int step, int stage, double, const SpectralField& u) {
    const SpectralField& r = detail::coupled_stage(rho, step, stage, coupling);
    SpectralField out = nonlocal_linear_part(W, r, u, m_pad);
    if (forcing) out += detail::coupled_stage(*forcing, step, stage, coupling);
    return out;
  };
  return integrate(u0, rho.T, rhs, cfg);
}

inline Trajectory solve_linear_LW(const PotentialVec& W, const Trajectory& rho,
                                  const Trajectory* forcing, const SpectralField& u0,
                                  const StepperConfig& cfg,
                                  StageCoupling coupling = StageCoupling::consistent) {
  return solve_linear_LW(synthesize(W, rho.grid()), rho, forcing, u0, cfg, coupling);
}

}  // namespace mckv
