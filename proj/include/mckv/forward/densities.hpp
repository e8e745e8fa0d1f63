#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mckv/spectral/fft.hpp"

namespace mckv {

/// phi == 1: the uniform steady state, for which the interaction potential is
/// not identifiable.
inline SpectralField uniform_density(const Grid& g) { return SpectralField::constant(g, 1.0); }

/// Smallest value of f sampled on an m^d grid (m = 4n by default).
inline double min_value(const SpectralField& f, int m = 0) {
  if (m <= 0) m = 4 * f.grid().n;
  const auto v = to_physical(f, m);
  return *std::min_element(v.begin(), v.end());
}

/// Density with real, positive Fourier coefficients
///   phi_k = amplitude * |k|^{-zeta}  for 0 < |k| <= kmax,   phi_0 = 1.
/// Throws DomainError if the result is not strictly positive.
inline SpectralField power_decay_density(const Grid& g, double amplitude, double zeta, int kmax = -1) {
  if (kmax < 0) kmax = g.kmax();
  SpectralField f = SpectralField::constant(g, 1.0);
  for (const auto& k : g.resolved_modes()) {
    if (k.is_zero() || k.norm2() > kmax * kmax) continue;
    f[k] = amplitude * std::pow(k.norm(), -zeta);
  }
  const double lo = min_value(f);
  if (!(lo > 0.0))
    throw DomainError("power_decay_density: density not positive (min " + std::to_string(lo) + ")");
  return f;
}

/// Largest c with |phi_k| >= c |k|^{-zeta} for 0 < |k| <= K.
inline double decay_constant(const SpectralField& phi, int K, double zeta) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& k : phi.grid().resolved_modes())
    if (!k.is_zero() && k.norm2() <= K * K) c = std::min(c, std::abs(phi[k]) * std::pow(k.norm(), zeta));
  return std::isfinite(c) ? c : 0.0;
}

}  // namespace mckv
