#pragma once

#include <algorithm>
#include <array>
#include <initializer_list>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "mckv/spectral/fft.hpp"
#include "mckv/spectral/field.hpp"

namespace mckv {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Point = std::array<double, kMaxDim>;

/// Vector field stored componentwise (size d).
using VectorField = std::vector<SpectralField>;

/// Multiplies every coefficient by symbol(k).
template <class Symbol>
SpectralField apply_multiplier(const SpectralField& f, Symbol&& symbol) {
  SpectralField out(f.grid());
  const Grid& g = f.grid();
  auto in = f.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == cplx{0.0, 0.0}) continue;
    o[i] = symbol(g.mode(i)) * in[i];
  }
  return out;
}

/// Partial derivative along axis j: multiplier 2 pi i k_j.
inline SpectralField partial(const SpectralField& f, int axis) {
  return apply_multiplier(f, [axis](const ModeIndex& k) {
    return cplx{0.0, kTwoPi * k.k[axis]};
  });
}

inline VectorField gradient(const SpectralField& f) {
  VectorField g;
  g.reserve(static_cast<std::size_t>(f.grid().d));
  for (int j = 0; j < f.grid().d; ++j) g.push_back(partial(f, j));
  return g;
}

inline SpectralField divergence(const VectorField& v) {
  if (v.empty()) throw InvalidArgument("divergence: empty vector field");
  const Grid& g = v.front().grid();
  if (static_cast<int>(v.size()) != g.d) throw GridMismatch("divergence: component count != d");
  SpectralField out(g);
  for (int j = 0; j < g.d; ++j) out += partial(v[static_cast<std::size_t>(j)], j);
  return out;
}

/// Multiplier -4 pi^2 |k|^2.
inline SpectralField laplacian(const SpectralField& f) {
  return apply_multiplier(f, [](const ModeIndex& k) {
    return cplx{-kTwoPi * kTwoPi * k.norm2(), 0.0};
  });
}

/// Convolution on the unit torus: (f*g)^(k) = f^(k) g^(k).
inline SpectralField convolve(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "convolve");
  SpectralField out(f.grid());
  auto a = f.data();
  auto b = g.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] * b[i];
  return out;
}

/// Pointwise product computed on a padded grid of m points per axis and
/// truncated back to the resolved modes.
inline SpectralField multiply(const SpectralField& f, const SpectralField& g, int m) {
  require_same_grid(f.grid(), g.grid(), "multiply");
  auto pf = to_physical(f, m);
  const auto pg = to_physical(g, m);
  for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= pg[i];
  return from_physical(pf, m, f.grid());
}

/// One density-velocity pair r * v of a flux.
struct FluxTerm {
  const SpectralField& density;
  const VectorField& velocity;
};

/// div( sum_terms r * v ), each product formed on the padded m^d grid.
inline SpectralField flux_divergence(std::initializer_list<FluxTerm> terms, int m) {
  if (terms.size() == 0) throw InvalidArgument("flux_divergence: no terms");
  const Grid& g = terms.begin()->density.grid();
  std::vector<std::vector<double>> flux(static_cast<std::size_t>(g.d));
  for (const auto& term : terms) {
    require_same_grid(g, term.density.grid(), "flux_divergence");
    if (static_cast<int>(term.velocity.size()) != g.d)
      throw GridMismatch("flux_divergence: velocity component count != d");
    const auto r = to_physical(term.density, m);
    for (int j = 0; j < g.d; ++j) {
      const auto& vj = term.velocity[static_cast<std::size_t>(j)];
      require_same_grid(g, vj.grid(), "flux_divergence");
      const auto v = to_physical(vj, m);
      auto& fj = flux[static_cast<std::size_t>(j)];
      if (fj.empty()) fj.assign(r.size(), 0.0);
      for (std::size_t i = 0; i < r.size(); ++i) fj[i] += r[i] * v[i];
    }
  }
  SpectralField out(g);
  for (int j = 0; j < g.d; ++j)
    out += partial(from_physical(flux[static_cast<std::size_t>(j)], m, g), j);
  return out;
}

enum class SobolevWeight {
  inhomogeneous,  // (1 + |k|^2)^s
  homogeneous,    // |k|^{2s}, zero mode excluded
};

/// sqrt( sum_k w_s(k) |f^(k)|^2 ). Negative s gives the dual H^{-|s|} norm.
inline double sobolev_norm(const SpectralField& f, double s,
                           SobolevWeight weight = SobolevWeight::inhomogeneous) {
  const Grid& g = f.grid();
  auto c = f.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a2 = std::norm(c[i]);
    if (a2 == 0.0) continue;
    const double k2 = g.mode(i).norm2();
    double w;
    if (weight == SobolevWeight::inhomogeneous) {
      w = std::pow(1.0 + k2, s);
    } else {
      if (k2 == 0.0) continue;
      w = std::pow(k2, s);
    }
    acc += w * a2;
  }
  return std::sqrt(acc);
}

/// W^{s,inf} norm: sum over multi-indices |a| <= s of sup |D^a f|, the sups
/// sampled on an m^d grid (m = 8n by default).
inline double sup_sobolev_norm(const SpectralField& f, int s, int m = 0) {
  const Grid& g = f.grid();
  if (m <= 0) m = 8 * g.n;
  auto sup = [m](const SpectralField& h) {
    double best = 0.0;
    for (double v : to_physical(h, m)) best = std::max(best, std::abs(v));
    return best;
  };
  // Enumerate multi-indices as non-decreasing axis sequences.
  double acc = 0.0;
  std::vector<std::pair<SpectralField, int>> layer{{f, 0}};
  for (int order = 0; order <= s; ++order) {
    std::vector<std::pair<SpectralField, int>> next;
    for (const auto& [h, first] : layer) {
      acc += sup(h);
      if (order < s)
        for (int j = first; j < g.d; ++j) next.emplace_back(partial(h, j), j);
    }
    layer = std::move(next);
  }
  return acc;
}

/// L^2(T^d) inner product via Parseval.
inline double l2_inner(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "l2_inner");
  auto a = f.data();
  auto b = g.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] * std::conj(b[i])).real();
  return acc;
}

inline double l2_norm(const SpectralField& f) { return std::sqrt(l2_inner(f, f)); }

/// Per-axis tables exp(2 pi i k x_j) for k in [-kmax, kmax], reused by point
/// evaluation at a fixed location.
class PointPhases {
 public:
  PointPhases() = default;
  PointPhases(const Grid& g, const Point& x) : d_(g.d), kmax_(g.kmax()) {
    const std::size_t len = static_cast<std::size_t>(2 * kmax_ + 1);
    table_.resize(static_cast<std::size_t>(d_) * len);
    for (int j = 0; j < d_; ++j) {
      for (int k = -kmax_; k <= kmax_; ++k) {
        const double a = kTwoPi * k * x[j];
        table_[static_cast<std::size_t>(j) * len + static_cast<std::size_t>(k + kmax_)] =
            cplx{std::cos(a), std::sin(a)};
      }
    }
  }

  cplx phase(const ModeIndex& m) const {
    const std::size_t len = static_cast<std::size_t>(2 * kmax_ + 1);
    cplx p{1.0, 0.0};
    for (int j = 0; j < d_; ++j)
      p *= table_[static_cast<std::size_t>(j) * len + static_cast<std::size_t>(m.k[j] + kmax_)];
    return p;
  }

  /// Exact trigonometric synthesis sum_k f^(k) e^{2 pi i k.x}.
  double evaluate(const SpectralField& f) const {
    const Grid& g = f.grid();
    auto c = f.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] == cplx{0.0, 0.0}) continue;
      acc += (c[i] * phase(g.mode(i))).real();
    }
    return acc;
  }

 private:
  int d_ = 0;
  int kmax_ = 0;
  std::vector<cplx> table_;
};

/// Value of f at x in T^d.
inline double eval_point(const SpectralField& f, const Point& x) {
  return PointPhases(f.grid(), x).evaluate(f);
}

/// Uniform physical grid point with multi-index j on an m^d grid.
inline Point grid_point(int d, int m, std::size_t flat) {
  Point x{};
  for (int j = d - 1; j >= 0; --j) {
    x[j] = static_cast<double>(flat % static_cast<std::size_t>(m)) / m;
    flat /= static_cast<std::size_t>(m);
  }
  return x;
}

}  // namespace mckv
