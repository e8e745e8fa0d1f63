#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "mckv/spectral/field.hpp"

namespace mckv {

namespace detail {

// Process-wide cache of FFTW plans. Planning is serialised (FFTW's planner is
// not re-entrant); executing a cached plan on fresh arrays is thread-safe.
class FftPlanCache {
 public:
  enum class Kind { r2c, c2r };

  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int d, int m) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(kind, d, m);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::array<int, kMaxDim> dims{};
    std::size_t real_size = 1, half_size = 1;
    for (int j = 0; j < d; ++j) {
      dims[j] = m;
      real_size *= static_cast<std::size_t>(m);
      half_size *= static_cast<std::size_t>(j == d - 1 ? m / 2 + 1 : m);
    }
    std::vector<double> r(real_size);
    std::vector<fftw_complex> c(half_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = kind == Kind::r2c
                      ? fftw_plan_dft_r2c(d, dims.data(), r.data(), c.data(), flags)
                      : fftw_plan_dft_c2r(d, dims.data(), c.data(), r.data(), flags);
    plans_.emplace(key, p);
    return p;
  }

  FftPlanCache(const FftPlanCache&) = delete;
  FftPlanCache& operator=(const FftPlanCache&) = delete;

 private:
  FftPlanCache() = default;
  ~FftPlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::map<std::tuple<Kind, int, int>, fftw_plan> plans_;
};

inline std::size_t half_spectrum_size(int d, int m) {
  std::size_t s = 1;
  for (int j = 0; j < d; ++j) s *= static_cast<std::size_t>(j == d - 1 ? m / 2 + 1 : m);
  return s;
}

// Position of mode k (with k_last >= 0) inside an r2c half spectrum on m^d.
inline std::size_t half_index(const ModeIndex& k, int m) {
  std::size_t idx = 0;
  for (int j = 0; j < k.d; ++j) {
    const int len = (j == k.d - 1) ? m / 2 + 1 : m;
    int w = k.k[j] % m;
    if (w < 0) w += m;
    idx = idx * static_cast<std::size_t>(len) + static_cast<std::size_t>(w);
  }
  return idx;
}

// True when k is the representative of the pair {k, -k} read directly from a
// half spectrum: last component > 0, or last component 0 and the remaining
// components lexicographically positive.
inline bool canonical_half(const ModeIndex& k) {
  if (k.k[k.d - 1] != 0) return k.k[k.d - 1] > 0;
  for (int j = 0; j < k.d - 1; ++j)
    if (k.k[j] != 0) return k.k[j] > 0;
  return true;  // zero mode
}

}  // namespace detail

/// Number of points per axis used for dealiased pseudo-spectral products:
/// ceil(pad * n), raised if needed so quadratic products of resolved modes
/// do not alias (m >= 3 kmax + 1 when pad >= 1.5).
inline int padded_size(const Grid& g, double pad) {
  int m = static_cast<int>(std::ceil(pad * g.n - 1e-12));
  if (pad >= 1.5) m = std::max(m, 3 * g.kmax() + 1);
  m = std::max(m, g.n);
  if (m % 2) ++m;
  return m;
}

/// Point values of f on the uniform m^d grid x_j = j/m (m >= n).
inline std::vector<double> to_physical(const SpectralField& f, int m) {
  const Grid& g = f.grid();
  if (m < 2 * g.kmax() + 1) throw InvalidArgument("to_physical: target grid too coarse");
  std::vector<cplx> half(detail::half_spectrum_size(g.d, m), cplx{0.0, 0.0});
  const auto coeffs = f.data();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const ModeIndex k = g.mode(i);
    if (!g.resolved(k) || k.k[g.d - 1] < 0) continue;
    half[detail::half_index(k, m)] = coeffs[i];
  }
  std::size_t real_size = 1;
  for (int j = 0; j < g.d; ++j) real_size *= static_cast<std::size_t>(m);
  std::vector<double> out(real_size);
  fftw_plan p = detail::FftPlanCache::instance().get(detail::FftPlanCache::Kind::c2r, g.d, m);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(half.data()), out.data());
  return out;
}

/// Fourier coefficients (truncated to the resolved modes of g) of the real
/// function sampled at x_j = j/m. The result is exactly conjugate symmetric.
inline SpectralField from_physical(std::span<const double> values, int m, const Grid& g) {
  std::size_t real_size = 1;
  for (int j = 0; j < g.d; ++j) real_size *= static_cast<std::size_t>(m);
  if (values.size() != real_size) throw GridMismatch("from_physical: sample count mismatch");
  if (m < 2 * g.kmax() + 1) throw InvalidArgument("from_physical: source grid too coarse");

  std::vector<double> in(values.begin(), values.end());
  std::vector<cplx> half(detail::half_spectrum_size(g.d, m));
  fftw_plan p = detail::FftPlanCache::instance().get(detail::FftPlanCache::Kind::r2c, g.d, m);
  fftw_execute_dft_r2c(p, in.data(), reinterpret_cast<fftw_complex*>(half.data()));

  const double scale = 1.0 / static_cast<double>(real_size);
  SpectralField f(g);
  auto coeffs = f.data();
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const ModeIndex k = g.mode(i);
    if (!g.resolved(k)) continue;
    if (detail::canonical_half(k)) {
      coeffs[i] = half[detail::half_index(k, m)] * scale;
    } else {
      coeffs[i] = std::conj(half[detail::half_index(-k, m)]) * scale;
    }
  }
  coeffs[0] = cplx{coeffs[0].real(), 0.0};
  return f;
}

}  // namespace mckv
