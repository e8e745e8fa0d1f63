#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mckv/parabolic/trajectory.hpp"

namespace mckv {

/// Blow-up threshold on coefficient magnitude.
inline constexpr double kBlowUpLimit = 1e12;

/// Default step count: at least 64 steps per unit time (512 per unit time,
/// i.e. M = 256 for T = 0.5).
inline int default_steps(double T) { return std::max(1, static_cast<int>(std::ceil(512.0 * T - 1e-9))); }

struct StepperConfig {
  int M = 256;
  Scheme scheme = Scheme::if_heun;
  double pad = 1.5;
  double tol_report = 1e-8;

  void validate() const {
    if (M < 1) throw InvalidArgument("StepperConfig: M must be >= 1");
    if (!(pad >= 1.0)) throw InvalidArgument("StepperConfig: pad must be >= 1");
  }
};

/// Explicit part F of du/dt = Lap u + shift u + F(t, u), evaluated at
/// stage `stage` (0 or 1) of step `step`.
using StageRhs =
    std::function<SpectralField(int step, int stage, double t, const SpectralField& u)>;

/// Integrating-factor integration of du/dt = (Lap + shift) u + F(t, u).
///
/// The linear part is propagated exactly by exp((-4 pi^2 |k|^2 + shift) dt).
/// IF-Euler:  u+ = E (u + dt F0)
/// IF-Heun:   v = E (u + dt F0),  u+ = E (u + dt/2 F0) + dt/2 F(t+dt, v)
/// The IF-Heun predictor v is recorded in Trajectory::stages.
inline Trajectory integrate(const SpectralField& u0, double T, const StageRhs& rhs,
                            const StepperConfig& cfg, double shift = 0.0) {
  cfg.validate();
  if (!(T > 0.0)) throw InvalidArgument("integrate: T must be positive");
  const Grid& g = u0.grid();
  const double dt = T / cfg.M;

  std::vector<double> E(g.size());
  for (std::size_t i = 0; i < E.size(); ++i) {
    const double k2 = g.mode(i).norm2();
    E[i] = std::exp((-kTwoPi * kTwoPi * k2 + shift) * dt);
  }
  auto propagate = [&E](SpectralField& f) {
    auto c = f.data();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= E[i];
  };
  auto check = [](const SpectralField& f, int step) {
    if (!f.is_finite()) throw NumericalAbort("non-finite coefficients", step);
    if (f.max_abs() > kBlowUpLimit) throw NumericalAbort("coefficient blow-up", step);
  };

  Trajectory traj;
  traj.T = T;
  traj.M = cfg.M;
  traj.scheme = cfg.scheme;
  traj.nodes.reserve(static_cast<std::size_t>(cfg.M) + 1);
  traj.nodes.push_back(u0);
  if (cfg.scheme == Scheme::if_heun) traj.stages.reserve(static_cast<std::size_t>(cfg.M));

  for (int m = 0; m < cfg.M; ++m) {
    const SpectralField& u = traj.nodes.back();
    const double t = traj.time(m);
    const SpectralField f0 = rhs(m, 0, t, u);
    require_same_grid(g, f0.grid(), "integrate");
    SpectralField next = u;
    if (cfg.scheme == Scheme::if_euler) {
      next.axpy(dt, f0);
      propagate(next);
    } else {
      SpectralField pred = u;
      pred.axpy(dt, f0);
      propagate(pred);
      check(pred, m + 1);
      const SpectralField f1 = rhs(m, 1, traj.time(m + 1), pred);
      next.axpy(0.5 * dt, f0);
      propagate(next);
      next.axpy(0.5 * dt, f1);
      traj.stages.push_back(std::move(pred));
    }
    check(next, m + 1);
    traj.nodes.push_back(std::move(next));
  }
  return traj;
}

}  // namespace mckv
