#pragma once

#include <random>

#include "mckv/spectral/basis.hpp"
#include "mckv/spectral/fft.hpp"

namespace mckv::testutil {

/// Random real field with modes |k| <= K and the given mean.
inline SpectralField random_field(const Grid& g, int K, std::mt19937_64& rng, double mean = 0.0,
                                  double scale = 1.0) {
  std::normal_distribution<double> n01;
  SpectralField f = SpectralField::constant(g, mean);
  for (const auto& k : g.resolved_modes()) {
    if (k.is_zero() || k.norm2() > K * K) continue;
    if (!detail::canonical_half(k)) continue;
    f.set_mode(k, scale * cplx{n01(rng), n01(rng)} / (1.0 + k.norm2()));
  }
  return f;
}

/// Random potential with coordinates drawn uniformly from [-a, a].
inline PotentialVec random_potential(int K, int d, std::mt19937_64& rng, double a = 1.0) {
  std::uniform_real_distribution<double> u(-a, a);
  PotentialVec w(K, d);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.values[i] = u(rng);
  return w;
}

inline double rel_diff(const SpectralField& a, const SpectralField& b) {
  return l2_norm(a - b) / std::max(l2_norm(b), 1e-300);
}

}  // namespace mckv::testutil
