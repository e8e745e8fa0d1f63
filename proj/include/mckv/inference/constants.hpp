#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mckv/core/error.hpp"

namespace mckv {

enum class Mode { strict, experimental };

inline std::string to_string(Mode m) { return m == Mode::strict ? "strict" : "experimental"; }

inline Mode mode_from_string(const std::string& s) {
  if (s == "strict") return Mode::strict;
  if (s == "experimental") return Mode::experimental;
  throw InvalidArgument("unknown mode: " + s);
}

/// delta_N = N^{-(alpha+1)/(2(alpha+1)+d)}.
inline double delta_N(double alpha, int d, double N) {
  if (!(N >= 1.0)) throw InvalidArgument("delta_N: N must be >= 1");
  return std::pow(N, -(alpha + 1.0) / (2.0 * (alpha + 1.0) + d));
}

/// eta = (beta-2)/beta - 3 zeta / (2(alpha+1)), the exponent of the
/// contraction rate delta_N^eta for W.
inline double eta_exponent(double alpha, double beta, double zeta) {
  return (beta - 2.0) / beta - 3.0 * zeta / (2.0 * (alpha + 1.0));
}

/// Smoothness/scaling constants of the inference theory.
struct ConstantsConfig {
  int d = 1;
  double alpha = 78.0;
  double beta = 6.0;
  double zeta = 6.55;
  double w = 39.5;
  Mode mode = Mode::strict;

  /// Open interval for w: (6 zeta/d, (1/d) min((alpha+1)(beta-2)/beta - 3 zeta/2, alpha+1-6 zeta)).
  std::pair<double, double> w_window() const {
    const double hi = std::min((alpha + 1.0) * (beta - 2.0) / beta - 1.5 * zeta, alpha + 1.0 - 6.0 * zeta) / d;
    return {6.0 * zeta / d, hi};
  }
  /// Open interval for zeta: (beta + d/2, (alpha+1)/12).
  std::pair<double, double> zeta_window() const { return {beta + 0.5 * d, (alpha + 1.0) / 12.0}; }
};

/// Numerical inputs for the (N, K)-dependent assumptions. Each entry is
/// checked only when supplied.
struct AssumptionInputs {
  double N = 0.0;
  int K = 0;
  int D = 0;
  std::optional<double> c_pr;          ///< prior-smoothness constant: D <= c_pr N delta_N^2
  std::optional<double> forward_bias;  ///< ||rho_{W0} - rho_{W0,K}||_{L2(X, lambda)}
  std::optional<double> inverse_bias;  ///< ||W0 - W0,K||_{L2}
  std::optional<double> c_err;         ///< bias constant for the inverse bias
  std::optional<double> cutoff_c;      ///< c in K_N = c (N delta_N^2)^{1/d}
};

struct ConstantCheck {
  std::string name;
  bool passed = false;
  bool required = true;  ///< informational checks do not affect validity
  std::string detail;
};

struct ConstantsReport {
  Mode mode = Mode::strict;
  std::vector<ConstantCheck> checks;
  double delta = 0.0;  ///< delta_N when N was supplied
  double eta = 0.0;
  double K_N = 0.0;    ///< cutoff suggestion when requested

  bool valid() const {
    for (const auto& c : checks)
      if (c.required && !c.passed) return false;
    return true;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (c.required && !c.passed) out.push_back(c.name + ": " + c.detail);
    return out;
  }
  const ConstantCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}
}  // namespace detail

/// Evaluates the constants system and, when inputs are supplied, the bias
/// and prior-smoothness assumptions. Report only; never throws on failure.
inline ConstantsReport validate_constants(const ConstantsConfig& c,
                                          const std::optional<AssumptionInputs>& a = std::nullopt) {
  using detail::fmt;
  ConstantsReport r;
  r.mode = c.mode;
  auto add = [&r](std::string name, bool ok, std::string detail, bool required = true) {
    r.checks.push_back({std::move(name), ok, required, std::move(detail)});
  };

  const bool beta_int = std::floor(c.beta) == c.beta;
  const bool beta_even = beta_int && std::fmod(c.beta, 2.0) == 0.0;
  add("beta", c.beta >= 4.0 + c.d && beta_even,
      "beta=" + fmt(c.beta) + " must be an even integer >= " + fmt(4.0 + c.d));
  const double alpha_lo = 12.0 * c.beta + 6.0 * c.d - 1.0;
  add("alpha", c.alpha > alpha_lo, "alpha=" + fmt(c.alpha) + " must exceed " + fmt(alpha_lo));
  const auto [z_lo, z_hi] = c.zeta_window();
  add("zeta", z_lo < c.zeta && c.zeta < z_hi,
      "zeta=" + fmt(c.zeta) + " must lie in (" + fmt(z_lo) + ", " + fmt(z_hi) + ")");
  const auto [w_lo, w_hi] = c.w_window();
  add("w", w_lo < c.w && c.w < w_hi, "w=" + fmt(c.w) + " must lie in (" + fmt(w_lo) + ", " + fmt(w_hi) + ")");
  r.eta = eta_exponent(c.alpha, c.beta, c.zeta);
  add("eta", r.eta > 0.0 && r.eta <= 1.0, "eta=" + fmt(r.eta) + " should lie in (0, 1]", false);

  if (a) {
    r.delta = delta_N(c.alpha, c.d, a->N);
    const double nd2 = a->N * r.delta * r.delta;
    if (a->c_pr)
      add("prior_smoothness", a->D <= *a->c_pr * nd2,
          "D=" + std::to_string(a->D) + " vs c_pr N delta_N^2=" + fmt(*a->c_pr * nd2));
    if (a->forward_bias)
      add("forward_bias", *a->forward_bias <= 0.5 * r.delta,
          "||rho_W0 - rho_W0K||=" + fmt(*a->forward_bias) + " vs delta_N/2=" + fmt(0.5 * r.delta));
    if (a->inverse_bias && a->c_err) {
      const double bound = *a->c_err * std::pow(r.delta, r.eta);
      add("inverse_bias", *a->inverse_bias <= bound,
          "||W0 - W0K||=" + fmt(*a->inverse_bias) + " vs c_err delta_N^eta=" + fmt(bound));
    }
    if (a->cutoff_c) {
      r.K_N = *a->cutoff_c * std::pow(nd2, 1.0 / c.d);
      add("cutoff", a->K <= r.K_N, "K=" + std::to_string(a->K) + " vs K_N=" + fmt(r.K_N), false);
    }
  }
  return r;
}

inline void to_json(nlohmann::json& j, const ConstantsReport& r) {
  j = nlohmann::json{{"mode", to_string(r.mode)}, {"valid", r.valid()}, {"eta", r.eta}, {"checks", nlohmann::json::array()}};
  if (r.delta > 0.0) j["delta_N"] = r.delta;
  if (r.K_N > 0.0) j["K_N"] = r.K_N;
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"required", c.required}, {"detail", c.detail}});
}

}  // namespace mckv
