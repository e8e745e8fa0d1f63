#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "mckv/core/error.hpp"

namespace mckv {

inline constexpr int kMaxDim = 3;

/// Integer frequency vector k in Z^d (d <= 3). Unused trailing entries are 0.
struct ModeIndex {
  int d = 1;
  std::array<int, kMaxDim> k{};

  ModeIndex() = default;
  ModeIndex(int dim, std::array<int, kMaxDim> comps) : d(dim), k(comps) {}

  static ModeIndex of(std::initializer_list<int> comps) {
    ModeIndex m;
    m.d = static_cast<int>(comps.size());
    int j = 0;
    for (int c : comps) m.k[j++] = c;
    return m;
  }

  int operator[](int j) const { return k[j]; }

  int norm2() const {
    int s = 0;
    for (int j = 0; j < d; ++j) s += k[j] * k[j];
    return s;
  }
  double norm() const { return std::sqrt(static_cast<double>(norm2())); }
  bool is_zero() const { return norm2() == 0; }

  ModeIndex operator-() const {
    ModeIndex m = *this;
    for (int j = 0; j < d; ++j) m.k[j] = -m.k[j];
    return m;
  }

  // Lexicographic over (k_1, ..., k_d); d is compared first but is always
  // equal for modes of the same field.
  auto operator<=>(const ModeIndex&) const = default;
  bool operator==(const ModeIndex&) const = default;

  std::string str() const {
    std::string s = "(";
    for (int j = 0; j < d; ++j) {
      if (j) s += ",";
      s += std::to_string(k[j]);
    }
    return s + ")";
  }
};

/// Uniform tensor grid with n points per axis on the unit torus T^d.
///
/// Resolved Fourier modes satisfy |k_j| <= kmax() = (n-1)/2 on every axis;
/// for even n the Nyquist frequency is never populated. Coefficients are
/// stored in FFT layout: axis 0 is the slowest index and k_j is stored at
/// position k_j mod n.
struct Grid {
  int d = 1;
  int n = 64;

  Grid() = default;
  Grid(int dim, int points) : d(dim), n(points) {
    if (d < 1 || d > kMaxDim) throw InvalidArgument("grid dimension must be 1..3");
    if (n < 3) throw InvalidArgument("grid needs at least 3 points per axis");
  }

  int kmax() const { return (n - 1) / 2; }

  std::size_t size() const {
    std::size_t s = 1;
    for (int j = 0; j < d; ++j) s *= static_cast<std::size_t>(n);
    return s;
  }

  bool resolved(const ModeIndex& m) const {
    for (int j = 0; j < d; ++j)
      if (std::abs(m.k[j]) > kmax()) return false;
    return true;
  }

  std::size_t index(const ModeIndex& m) const {
    std::size_t idx = 0;
    for (int j = 0; j < d; ++j) {
      int w = m.k[j] % n;
      if (w < 0) w += n;
      idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(w);
    }
    return idx;
  }

  /// Inverse of index(): maps storage slots back to signed frequencies.
  ModeIndex mode(std::size_t idx) const {
    ModeIndex m;
    m.d = d;
    for (int j = d - 1; j >= 0; --j) {
      int w = static_cast<int>(idx % static_cast<std::size_t>(n));
      idx /= static_cast<std::size_t>(n);
      m.k[j] = (w > n / 2 || (n % 2 == 0 && w == n / 2)) ? w - n : w;
    }
    return m;
  }

  /// All resolved modes in lexicographic order.
  std::vector<ModeIndex> resolved_modes() const {
    std::vector<ModeIndex> out;
    const int km = kmax();
    ModeIndex m;
    m.d = d;
    std::array<int, kMaxDim> c{};
    for (int j = 0; j < d; ++j) c[j] = -km;
    while (true) {
      m.k = c;
      out.push_back(m);
      int j = d - 1;
      while (j >= 0 && c[j] == km) {
        c[j] = -km;
        --j;
      }
      if (j < 0) break;
      ++c[j];
    }
    return out;
  }

  bool operator==(const Grid&) const = default;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw GridMismatch(std::string(where) + ": grid mismatch");
}

}  // namespace mckv
