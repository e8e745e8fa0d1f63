#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mckv/spectral/ops.hpp"

namespace mckv {

/// One-dimensional real Fourier factor:
///   sqrt2 cos(2 pi m y) for m > 0, 1 for m = 0, sqrt2 sin(2 pi m y) for m < 0.
inline double trig_factor(int m, double y) {
  if (m == 0) return 1.0;
  const double a = kTwoPi * m * y;
  return m > 0 ? std::numbers::sqrt2 * std::cos(a) : std::numbers::sqrt2 * std::sin(a);
}

/// Tensorised real orthonormal basis function tau_k(x) = prod_j T_{k_j}(x_j).
inline double basis_tau(const ModeIndex& k, const Point& x) {
  double v = 1.0;
  for (int j = 0; j < k.d; ++j) v *= trig_factor(k.k[j], x[j]);
  return v;
}

/// Modes k != 0 with Euclidean |k| <= K in lexicographic order. This order
/// fixes the coordinates of every PotentialVec.
inline std::vector<ModeIndex> potential_modes(int K, int d) {
  if (K < 1) throw InvalidArgument("potential_modes: K must be >= 1");
  if (d < 1 || d > kMaxDim) throw InvalidArgument("potential_modes: d must be 1..3");
  std::vector<ModeIndex> out;
  ModeIndex m;
  m.d = d;
  std::array<int, kMaxDim> c{};
  for (int j = 0; j < d; ++j) c[j] = -K;
  const int K2 = K * K;
  while (true) {
    m.k = c;
    if (!m.is_zero() && m.norm2() <= K2) out.push_back(m);
    int j = d - 1;
    while (j >= 0 && c[j] == K) {
      c[j] = -K;
      --j;
    }
    if (j < 0) break;
    ++c[j];
  }
  return out;
}

/// D = #{k in Z^d : 0 < |k| <= K}.
inline int count_dim(int K, int d) { return static_cast<int>(potential_modes(K, d).size()); }

/// Coordinates of a mean-zero trigonometric polynomial in the tau_k basis of
/// the span of {tau_k : 0 < |k| <= K}. Since the basis is L^2-orthonormal,
/// the Euclidean norm of `values` is the L^2 norm of the function.
struct PotentialVec {
  int K = 1;
  int d = 1;
  Eigen::VectorXd values;

  PotentialVec() = default;
  PotentialVec(int K_, int d_) : K(K_), d(d_), values(Eigen::VectorXd::Zero(count_dim(K_, d_))) {}
  PotentialVec(int K_, int d_, Eigen::VectorXd v) : K(K_), d(d_), values(std::move(v)) {
    if (values.size() != count_dim(K, d))
      throw InvalidArgument("PotentialVec: coordinate count does not match dim(E_K)");
  }

  Eigen::Index size() const { return values.size(); }
  std::vector<ModeIndex> modes() const { return potential_modes(K, d); }

  static PotentialVec unit(int K, int d, Eigen::Index i) {
    PotentialVec p(K, d);
    p.values[i] = 1.0;
    return p;
  }

  friend PotentialVec operator+(PotentialVec a, const PotentialVec& b) {
    a.values += b.values;
    return a;
  }
  friend PotentialVec operator-(PotentialVec a, const PotentialVec& b) {
    a.values -= b.values;
    return a;
  }
  friend PotentialVec operator*(double s, PotentialVec a) {
    a.values *= s;
    return a;
  }
};

/// Fourier coefficient of tau_k at the frequency q (|q_j| = |k_j|), else 0.
inline cplx tau_coefficient(const ModeIndex& k, const ModeIndex& q) {
  cplx c{1.0, 0.0};
  const double h = 1.0 / std::numbers::sqrt2;
  for (int j = 0; j < k.d; ++j) {
    const int m = k.k[j];
    const int p = q.k[j];
    if (m == 0) {
      if (p != 0) return {0.0, 0.0};
    } else if (m > 0) {
      if (p != m && p != -m) return {0.0, 0.0};
      c *= h;
    } else {
      // sqrt2 sin(2 pi m y) = (e_m - e_{-m}) / (sqrt2 i)
      if (p == m) {
        c *= cplx{0.0, -h};
      } else if (p == -m) {
        c *= cplx{0.0, h};
      } else {
        return {0.0, 0.0};
      }
    }
  }
  return c;
}

/// All frequencies q on which tau_k has a nonzero coefficient (2^{#nonzero k_j}).
inline std::vector<ModeIndex> tau_support(const ModeIndex& k) {
  std::vector<ModeIndex> out{k};
  for (int j = 0; j < k.d; ++j) {
    if (k.k[j] == 0) continue;
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      ModeIndex q = out[i];
      q.k[j] = -q.k[j];
      out.push_back(q);
    }
  }
  return out;
}

inline void require_representable(int K, const Grid& g, const char* where) {
  if (K > g.kmax())
    throw InvalidArgument(std::string(where) + ": K exceeds the largest resolved grid mode");
}

/// The function sum_k W_k tau_k as a SpectralField on g.
inline SpectralField synthesize(const PotentialVec& w, const Grid& g) {
  if (w.d != g.d) throw GridMismatch("synthesize: dimension mismatch");
  require_representable(w.K, g, "synthesize");
  SpectralField f(g);
  const auto modes = w.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double a = w.values[static_cast<Eigen::Index>(i)];
    if (a == 0.0) continue;
    for (const auto& q : tau_support(modes[i])) f[q] += a * tau_coefficient(modes[i], q);
  }
  return f;
}

/// Coordinates <f, tau_k> for 0 < |k| <= K; the mean of f is discarded.
inline PotentialVec project_to_EK(const SpectralField& f, int K) {
  const Grid& g = f.grid();
  require_representable(K, g, "project_to_EK");
  PotentialVec w(K, g.d);
  const auto modes = w.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    // <f, tau> = sum_q f^(q) conj(tau^(q)) for real tau.
    cplx acc{0.0, 0.0};
    for (const auto& q : tau_support(modes[i])) acc += f[q] * std::conj(tau_coefficient(modes[i], q));
    w.values[static_cast<Eigen::Index>(i)] = acc.real();
  }
  return w;
}

/// Coordinates of w in the basis of the span for truncation K2; modes with
/// |k| > K2 are dropped when K2 < w.K.
inline PotentialVec embed(const PotentialVec& w, int K2) {
  PotentialVec out(K2, w.d);
  const auto src = w.modes();
  const auto dst = out.modes();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto it = std::lower_bound(dst.begin(), dst.end(), src[i]);
    if (it != dst.end() && *it == src[i]) out.values[it - dst.begin()] = w.values[static_cast<Eigen::Index>(i)];
  }
  return out;
}

/// Drops every mode with |k| > K (and the mean when `drop_mean`).
inline SpectralField low_pass(const SpectralField& f, int K, bool drop_mean = false) {
  const Grid& g = f.grid();
  SpectralField out = f;
  auto c = out.data();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const ModeIndex k = g.mode(i);
    if (k.norm2() > K * K || (drop_mean && k.is_zero())) c[i] = {0.0, 0.0};
  }
  return out;
}

}  // namespace mckv
