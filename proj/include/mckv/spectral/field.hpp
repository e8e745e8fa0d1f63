#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "mckv/spectral/grid.hpp"

namespace mckv {

using cplx = std::complex<double>;

/// Real scalar field on T^d stored through its Fourier coefficients
///   u_hat(k) = \int u(x) exp(-2 pi i k.x) dx.
///
/// Coefficients are conjugate symmetric, u_hat(0) is real and equals the
/// mean of u. Unresolved slots (even-n Nyquist) stay zero.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const Grid& g) : grid_(g), c_(g.size(), cplx{0.0, 0.0}) {}

  static SpectralField constant(const Grid& g, double value) {
    SpectralField f(g);
    f.c_[0] = cplx{value, 0.0};
    return f;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return c_.size(); }
  bool empty() const { return c_.empty(); }

  cplx& operator[](const ModeIndex& m) { return c_[grid_.index(m)]; }
  const cplx& operator[](const ModeIndex& m) const { return c_[grid_.index(m)]; }

  /// Raw coefficient storage in FFT layout.
  std::span<cplx> data() { return c_; }
  std::span<const cplx> data() const { return c_; }

  double mean() const { return c_[0].real(); }

  /// Sets the coefficient at m and its mirror so the field stays real.
  void set_mode(const ModeIndex& m, cplx value) {
    if (m.is_zero()) {
      c_[0] = cplx{value.real(), 0.0};
      return;
    }
    (*this)[m] = value;
    (*this)[-m] = std::conj(value);
  }

  /// Largest violation of c(-k) = conj(c(k)), including Im c(0).
  double symmetry_defect() const {
    double worst = std::abs(c_[0].imag());
    for (std::size_t i = 0; i < c_.size(); ++i) {
      const ModeIndex m = grid_.mode(i);
      worst = std::max(worst, std::abs(c_[i] - std::conj(c_[grid_.index(-m)])));
    }
    return worst;
  }

  bool is_finite() const {
    for (const auto& z : c_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : c_) m = std::max(m, std::abs(z));
    return m;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField +=");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField -=");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& z : c_) z *= s;
    return *this;
  }

  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField axpy");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }

  bool operator==(const SpectralField& o) const { return grid_ == o.grid_ && c_ == o.c_; }

 private:
  Grid grid_;
  std::vector<cplx> c_;
};

}  // namespace mckv
