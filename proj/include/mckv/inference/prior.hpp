#pragma once

#include <random>

#include "mckv/inference/constants.hpp"
#include "mckv/spectral/basis.hpp"

namespace mckv {

/// Truncated Gaussian prior on E_K:
///   W = sum_k (sqrt(N) delta_N)^{-1} (1 + |k|^2)^{-(alpha+1)/2} g_k tau_k,  g_k ~ N(0, 1).
struct PriorSpec {
  double alpha = 1.0;
  int K = 1;
  int d = 1;
  double N = 1.0;
  double delta = 1.0;
  Eigen::VectorXd diag;  ///< per-mode standard deviation

  static PriorSpec make(double alpha, int K, int d, double N) {
    PriorSpec p;
    p.alpha = alpha;
    p.K = K;
    p.d = d;
    p.N = N;
    p.delta = delta_N(alpha, d, N);
    const auto modes = potential_modes(K, d);
    p.diag.resize(static_cast<Eigen::Index>(modes.size()));
    const double scale = 1.0 / (std::sqrt(N) * p.delta);
    for (std::size_t i = 0; i < modes.size(); ++i)
      p.diag[static_cast<Eigen::Index>(i)] = scale * std::pow(1.0 + modes[i].norm2(), -(alpha + 1.0) / 2.0);
    return p;
  }

  Eigen::Index dim() const { return diag.size(); }
  /// Diagonal of Sigma^{-1}.
  Eigen::VectorXd precision() const { return diag.array().square().inverse(); }
  /// W^T Sigma^{-1} W.
  double quadratic(const PotentialVec& W) const { return (W.values.array().square() * precision().array()).sum(); }
};

inline PotentialVec sample_prior(const PriorSpec& prior, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  PotentialVec w(prior.K, prior.d);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.values[i] = prior.diag[i] * n01(rng);
  return w;
}

}  // namespace mckv
