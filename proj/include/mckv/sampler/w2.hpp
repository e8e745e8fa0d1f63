#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mckv/core/error.hpp"

namespace mckv {

using SampleSet = std::vector<Eigen::VectorXd>;

inline constexpr int kSlicedProjections = 128;
inline constexpr std::uint64_t kSlicedSeed = 0x5eed5eedULL;
inline constexpr std::size_t kExactAssignmentMax = 64;

/// Squared W2 between the empirical measures of two real samples, by
/// integrating (F^{-1}(u) - G^{-1}(u))^2 over the merged quantile breakpoints.
inline double w2_squared_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("w2: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  if (n == m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc / static_cast<double>(n);
  }
  // breakpoints i/n and j/m, compared exactly as i*m vs j*n
  double acc = 0.0;
  std::size_t i = 0, j = 0, prev = 0;  // prev: position in units of 1/(n m)
  while (i < n && j < m) {
    const std::size_t next_a = (i + 1) * m, next_b = (j + 1) * n;
    const std::size_t next = std::min(next_a, next_b);
    acc += static_cast<double>(next - prev) * (a[i] - b[j]) * (a[i] - b[j]);
    prev = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return acc / static_cast<double>(n * m);
}

/// Minimum-cost perfect assignment (Hungarian method with potentials), O(n^3).
/// Returns col[i], the column assigned to row i.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  if (C.cols() != n) throw InvalidArgument("min_cost_assignment: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1)), v(static_cast<std::size_t>(n + 1));
  std::vector<int> p(static_cast<std::size_t>(n + 1)), way(static_cast<std::size_t>(n + 1));
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = C(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return col;
}

inline Eigen::MatrixXd squared_distance_matrix(const SampleSet& a, const SampleSet& b) {
  Eigen::MatrixXd C(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (a[i] - b[j]).squaredNorm();
  return C;
}

/// Exact squared W2 between two equal-size empirical measures: the optimal
/// assignment cost divided by n, summed in row order.
inline double w2_squared_assignment(const SampleSet& a, const SampleSet& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("w2: empty sample set");
  if (a.size() != b.size()) throw InvalidArgument("w2_squared_assignment: sample counts differ");
  const Eigen::MatrixXd C = squared_distance_matrix(a, b);
  const auto col = min_cost_assignment(C);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += C(static_cast<Eigen::Index>(i), col[i]);
  return acc / static_cast<double>(a.size());
}

/// Sliced squared W2: mean over fixed-seed random unit directions of the 1D
/// squared W2 of the projected samples.
inline double w2_squared_sliced(const SampleSet& a, const SampleSet& b, int projections = kSlicedProjections,
                                std::uint64_t seed = kSlicedSeed) {
  if (a.empty() || b.empty()) throw InvalidArgument("w2: empty sample set");
  const Eigen::Index D = a.front().size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  double acc = 0.0;
  std::vector<double> pa(a.size()), pb(b.size());
  for (int p = 0; p < projections; ++p) {
    Eigen::VectorXd dir(D);
    for (Eigen::Index i = 0; i < D; ++i) dir[i] = n01(rng);
    dir.normalize();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = a[i].dot(dir);
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = b[i].dot(dir);
    acc += w2_squared_1d(pa, pb);
  }
  return acc / projections;
}

/// Squared W2 diagnostic: exact via quantiles in 1D, exact via assignment for
/// equal sizes n <= 64, sliced otherwise.
inline double w2_diagnostics(const SampleSet& a, const SampleSet& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("w2: empty sample set");
  if (a.front().size() == 1) {
    std::vector<double> x(a.size()), y(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) x[i] = a[i][0];
    for (std::size_t i = 0; i < b.size(); ++i) y[i] = b[i][0];
    return w2_squared_1d(x, y);
  }
  if (a.size() == b.size() && a.size() <= kExactAssignmentMax) return w2_squared_assignment(a, b);
  return w2_squared_sliced(a, b);
}

}  // namespace mckv
