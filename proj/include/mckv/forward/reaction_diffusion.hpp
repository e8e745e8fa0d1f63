#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mckv/parabolic/linear.hpp"
#include "mckv/parabolic/stepper.hpp"
#include "mckv/spectral/fft.hpp"

namespace mckv {

using ScalarFn = std::function<double(double)>;

/// Reaction term R(u) = linear_rate * u + nonlinear(u).
///
/// The linear rate is propagated exactly by the integrating factor, so a
/// purely linear reaction is integrated without time-stepping error.
/// Either part may be absent.
struct ReactionSpec {
  ScalarFn R;   ///< nonlinear part, evaluated pointwise
  ScalarFn dR;  ///< its derivative
  double linear_rate = 0.0;
  double lo = -std::numeric_limits<double>::infinity();  ///< declared domain
  double hi = std::numeric_limits<double>::infinity();

  bool has_nonlinear() const { return static_cast<bool>(R); }

  double value(double u) const { return linear_rate * u + (R ? R(u) : 0.0); }
  double derivative(double u) const { return linear_rate + (dR ? dR(u) : 0.0); }

  /// Load-time check: finite values and dR against central differences of R
  /// at a few points of the declared domain.
  void validate() const {
    if (static_cast<bool>(R) != static_cast<bool>(dR))
      throw InvalidArgument("ReactionSpec: R and R' must be supplied together");
    if (!(lo < hi)) throw InvalidArgument("ReactionSpec: empty domain");
    if (!std::isfinite(linear_rate)) throw InvalidArgument("ReactionSpec: linear_rate not finite");
    if (!R) return;
    const double a = std::isfinite(lo) ? lo : -2.0;
    const double b = std::isfinite(hi) ? hi : 2.0;
    constexpr int kProbes = 7;
    for (int i = 1; i <= kProbes; ++i) {
      const double u = a + (b - a) * i / (kProbes + 1);
      const double h = 1e-5 * std::max(1.0, std::abs(u));
      const double fd = (R(u + h) - R(u - h)) / (2.0 * h);
      const double d = dR(u);
      if (!std::isfinite(R(u)) || !std::isfinite(d))
        throw InvalidArgument("ReactionSpec: non-finite value at u=" + std::to_string(u));
      if (std::abs(fd - d) > 1e-5 * (1.0 + std::abs(d)))
        throw InvalidArgument("ReactionSpec: R' inconsistent with R at u=" + std::to_string(u));
    }
  }
};

namespace detail {
inline void check_range(const std::vector<double>& u, const ReactionSpec& spec, int step) {
  for (double v : u)
    if (v < spec.lo || v > spec.hi)
      throw DomainError("reaction argument " + std::to_string(v) + " outside declared domain at step " +
                        std::to_string(step));
}
}  // namespace detail

/// Solves du/dt - Lap u = R(u), u(0) = phi on [0, T].
inline Trajectory solve_rd(const ReactionSpec& spec, const SpectralField& phi, double T,
                           const StepperConfig& cfg) {
  spec.validate();
  if (phi.grid().d > kMaxDim) throw InvalidArgument("solve_rd: d must be <= 3");
  const Grid& g = phi.grid();
  const int m_pad = padded_size(g, cfg.pad);
  const StageRhs rhs = [&](int step, int, double, const SpectralField& u) {
    if (!spec.has_nonlinear()) return SpectralField(g);
    std::vector<double> v = to_physical(u, m_pad);
    detail::check_range(v, spec, step);
    for (double& x : v) x = spec.R(x);
    return from_physical(v, m_pad, g);
  };
  return integrate(phi, T, rhs, cfg, spec.linear_rate);
}

/// Linearisation in the reaction term: solves
///   di/dt - Lap i - R'(u) i = H(u),  i(0) = 0,
/// along u = solve_rd(spec, ...). Coefficients are read at the recorded stages
/// of u, so the result is the exact derivative of the discrete map R -> u.
inline Trajectory rd_linearisation(const ReactionSpec& spec, const ScalarFn& H, const Trajectory& u,
                                   const StepperConfig& cfg,
                                   StageCoupling coupling = StageCoupling::consistent) {
  spec.validate();
  if (!H) throw InvalidArgument("rd_linearisation: H is empty");
  if (u.M != cfg.M) throw GridMismatch("rd_linearisation: trajectory and stepper step counts differ");
  const Grid& g = u.grid();
  const int m_pad = padded_size(g, cfg.pad);
  const StageRhs rhs = [&](int step, int stage, double, const SpectralField& i) {
    std::vector<double> uv = to_physical(detail::coupled_stage(u, step, stage, coupling), m_pad);
    detail::check_range(uv, spec, step);
    std::vector<double> iv = to_physical(i, m_pad);
    for (std::size_t j = 0; j < uv.size(); ++j) {
      const double nl = spec.dR ? spec.dR(uv[j]) : 0.0;
      iv[j] = nl * iv[j] + H(uv[j]);
    }
    return from_physical(iv, m_pad, g);
  };
  return integrate(SpectralField(g), u.T, rhs, cfg, spec.linear_rate);
}

}  // namespace mckv
