#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mckv/spectral/ops.hpp"

namespace mckv {

enum class Scheme { if_euler, if_heun };

inline std::string to_string(Scheme s) { return s == Scheme::if_euler ? "if_euler" : "if_heun"; }

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "if_euler" || s == "IF-Euler") return Scheme::if_euler;
  if (s == "if_heun" || s == "IF-Heun") return Scheme::if_heun;
  throw InvalidArgument("unknown scheme: " + s);
}

/// Solution sampled on the uniform time grid t_m = m T / M, m = 0..M.
///
/// For IF-Heun runs `stages[m]` holds the predictor state at t_{m+1} used
/// inside step m. Linearised solves read coefficients through stage() so that
/// they differentiate the discrete scheme exactly.
struct Trajectory {
  double T = 0.0;
  int M = 0;
  Scheme scheme = Scheme::if_heun;
  std::vector<SpectralField> nodes;
  std::vector<SpectralField> stages;

  double dt() const { return T / M; }
  double time(int m) const { return T * m / M; }
  const Grid& grid() const { return nodes.front().grid(); }
  bool has_stages() const { return !stages.empty(); }

  /// Coefficient state seen by stage s (0: start of step, 1: end-of-step
  /// predictor) of step m. Without recorded stages the end node is used.
  const SpectralField& stage(int m, int s) const {
    if (s == 0) return nodes[static_cast<std::size_t>(m)];
    return stages.empty() ? nodes[static_cast<std::size_t>(m + 1)]
                          : stages[static_cast<std::size_t>(m)];
  }

  /// Interval index and interpolation weight for t in [0, T].
  std::pair<int, double> locate(double t) const {
    if (!(t >= 0.0 && t <= T)) throw InvalidArgument("time outside [0, T]");
    const double s = t / dt();
    int m = static_cast<int>(std::floor(s));
    if (m >= M) m = M - 1;
    return {m, s - m};
  }

  /// Linear interpolation in time between stored nodes.
  SpectralField at_time(double t) const {
    const auto [m, w] = locate(t);
    SpectralField f = nodes[static_cast<std::size_t>(m)];
    f *= (1.0 - w);
    f.axpy(w, nodes[static_cast<std::size_t>(m + 1)]);
    return f;
  }

  double eval(double t, const Point& x) const {
    const auto [m, w] = locate(t);
    const PointPhases ph(grid(), x);
    return (1.0 - w) * ph.evaluate(nodes[static_cast<std::size_t>(m)]) +
           w * ph.evaluate(nodes[static_cast<std::size_t>(m + 1)]);
  }

  void check_compatible(const Trajectory& o, const char* where) const {
    if (M != o.M || std::abs(T - o.T) > 1e-14 * std::max(1.0, T))
      throw GridMismatch(std::string(where) + ": time grid mismatch");
    require_same_grid(grid(), o.grid(), where);
  }
};

/// a * x + b * y, node- and stage-wise (stages kept only when both carry them).
inline Trajectory combine(double a, const Trajectory& x, double b, const Trajectory& y) {
  x.check_compatible(y, "combine");
  Trajectory out;
  out.T = x.T;
  out.M = x.M;
  out.scheme = x.scheme;
  out.nodes.reserve(x.nodes.size());
  for (std::size_t i = 0; i < x.nodes.size(); ++i) {
    SpectralField f = x.nodes[i];
    f *= a;
    f.axpy(b, y.nodes[i]);
    out.nodes.push_back(std::move(f));
  }
  if (x.has_stages() && y.has_stages()) {
    for (std::size_t i = 0; i < x.stages.size(); ++i) {
      SpectralField f = x.stages[i];
      f *= a;
      f.axpy(b, y.stages[i]);
      out.stages.push_back(std::move(f));
    }
  }
  return out;
}

/// Zero trajectory on the same space-time grid as `like`.
inline Trajectory zeros_like(const Trajectory& like) {
  Trajectory out;
  out.T = like.T;
  out.M = like.M;
  out.scheme = like.scheme;
  out.nodes.assign(like.nodes.size(), SpectralField(like.grid()));
  if (like.has_stages()) out.stages.assign(like.stages.size(), SpectralField(like.grid()));
  return out;
}

/// Exact L^2([0,T]; L^2) inner product of the piecewise-linear-in-time
/// interpolants of a and b.
inline double l2l2_inner(const Trajectory& a, const Trajectory& b) {
  a.check_compatible(b, "l2l2_inner");
  const double h = a.dt();
  double acc = 0.0;
  for (int m = 0; m < a.M; ++m) {
    const auto& a0 = a.nodes[static_cast<std::size_t>(m)];
    const auto& a1 = a.nodes[static_cast<std::size_t>(m + 1)];
    const auto& b0 = b.nodes[static_cast<std::size_t>(m)];
    const auto& b1 = b.nodes[static_cast<std::size_t>(m + 1)];
    acc += h * ((l2_inner(a0, b0) + l2_inner(a1, b1)) / 3.0 +
                (l2_inner(a0, b1) + l2_inner(a1, b0)) / 6.0);
  }
  return acc;
}

inline double l2l2_norm(const Trajectory& a) { return std::sqrt(std::max(0.0, l2l2_inner(a, a))); }

/// ||a - b||_{L2L2}
inline double l2l2_distance(const Trajectory& a, const Trajectory& b) {
  return l2l2_norm(combine(1.0, a, -1.0, b));
}

/// Keeps every `stride`-th node of a finer trajectory (M must divide).
inline Trajectory subsample(const Trajectory& fine, int stride) {
  if (stride < 1 || fine.M % stride != 0) throw InvalidArgument("subsample: stride must divide M");
  Trajectory out;
  out.T = fine.T;
  out.M = fine.M / stride;
  out.scheme = fine.scheme;
  for (int m = 0; m <= out.M; ++m) out.nodes.push_back(fine.nodes[static_cast<std::size_t>(m * stride)]);
  return out;
}

}  // namespace mckv
