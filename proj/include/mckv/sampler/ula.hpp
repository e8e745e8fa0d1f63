#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "mckv/inference/surrogate.hpp"
#include "mckv/spectral/io.hpp"

namespace mckv {

/// Drift of the Langevin diffusion at theta, i.e. grad log of the target
/// density, plus the target energy (-log density up to a constant) when known.
struct DriftEval {
  Eigen::VectorXd drift;
  double energy = std::numeric_limits<double>::quiet_NaN();
};

using Target = std::function<DriftEval(const PotentialVec&)>;

struct ChainState {
  PotentialVec theta;
  double gamma = 0.0;
  std::uint64_t k = 0;
  std::mt19937_64 rng;

  void validate() const {
    if (!(gamma > 0.0)) throw InvalidArgument("ChainState: gamma must be positive");
    if (!theta.values.allFinite()) throw InvalidArgument("ChainState: theta is not finite");
  }
};

namespace detail {
inline std::string snapshot(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}
}  // namespace detail

/// theta <- theta + gamma * drift(theta) + sqrt(2 gamma) xi. With
/// `with_noise == false` xi is zero and the rng is left untouched.
inline ChainState ula_step(ChainState s, const DriftEval& at_theta, bool with_noise = true) {
  s.validate();
  if (at_theta.drift.size() != s.theta.size()) throw InvalidArgument("ula_step: drift dimension mismatch");
  if (!at_theta.drift.allFinite())
    throw NumericalAbort("ula_step: non-finite drift at iterate " + detail::snapshot(s.theta.values),
                         static_cast<int>(s.k));
  s.theta.values += s.gamma * at_theta.drift;
  if (with_noise) {
    std::normal_distribution<double> n01;
    const double scale = std::sqrt(2.0 * s.gamma);
    for (Eigen::Index i = 0; i < s.theta.size(); ++i) s.theta.values[i] += scale * n01(s.rng);
  }
  ++s.k;
  return s;
}

inline ChainState ula_step(ChainState s, const Target& target, bool with_noise = true) {
  const DriftEval ev = target(s.theta);
  return ula_step(std::move(s), ev, with_noise);
}

struct ChainDiagnostics {
  double gamma = 0.0;
  std::vector<double> drift_norms;  ///< per step, all iterations
  std::vector<double> energy;       ///< per step, all iterations (NaN if unknown)
  Eigen::VectorXd lag1;             ///< lag-1 autocorrelation of kept samples per coordinate
  Eigen::VectorXd act;              ///< AR(1) integrated autocorrelation time (1+r)/(1-r)
  double seconds = 0.0;
};

struct ChainRun {
  std::vector<PotentialVec> samples;  ///< kept samples after burn-in and thinning
  int burn_in = 0;
  int kept = 0;
  int thin = 1;
  std::uint64_t seed = 0;
  PotentialVec W_init;
  ChainDiagnostics diagnostics;
};

inline int default_burn_in(int n_steps) { return n_steps / 5; }

/// gamma = 0.5 / (max precision + 2 lambda): the curvature of the quadratic
/// model of the target, prior part plus convexified tail.
inline double default_step_size(const PriorSpec& prior, double lambda) {
  return 0.5 / (prior.precision().maxCoeff() + 2.0 * lambda);
}

namespace detail {
inline double lag1_autocorrelation(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c0 += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < n) c1 += (x[i] - mean) * (x[i + 1] - mean);
  }
  return c0 > 0.0 ? c1 / c0 : 0.0;
}

inline double ar1_time(double r) {
  r = std::clamp(r, -0.999999, 0.999999);
  return (1.0 + r) / (1.0 - r);
}
}  // namespace detail

/// Runs n_steps ULA iterations from W_init; iterates k = J_in+1, ..., n_steps
/// are kept, every `thin`-th one.
inline ChainRun run_ula(const PotentialVec& W_init, double gamma, int n_steps, int burn_in, int thin,
                        std::uint64_t seed, const Target& target) {
  if (!(n_steps > burn_in) || burn_in < 0) throw InvalidArgument("run_ula: need n_steps > burn_in >= 0");
  if (thin < 1) throw InvalidArgument("run_ula: thin must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  ChainRun run;
  run.burn_in = burn_in;
  run.thin = thin;
  run.seed = seed;
  run.W_init = W_init;
  run.diagnostics.gamma = gamma;
  run.diagnostics.drift_norms.reserve(static_cast<std::size_t>(n_steps));
  run.diagnostics.energy.reserve(static_cast<std::size_t>(n_steps));
  ChainState s{W_init, gamma, 0, std::mt19937_64(seed)};
  for (int k = 1; k <= n_steps; ++k) {
    const DriftEval ev = target(s.theta);
    run.diagnostics.drift_norms.push_back(ev.drift.norm());
    run.diagnostics.energy.push_back(ev.energy);
    s = ula_step(std::move(s), ev);
    if (k > burn_in && (k - burn_in) % thin == 0) run.samples.push_back(s.theta);
  }
  run.kept = static_cast<int>(run.samples.size());
  const Eigen::Index D = W_init.size();
  run.diagnostics.lag1.resize(D);
  run.diagnostics.act.resize(D);
  std::vector<double> col(run.samples.size());
  for (Eigen::Index j = 0; j < D; ++j) {
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = run.samples[i].values[j];
    run.diagnostics.lag1[j] = detail::lag1_autocorrelation(col);
    run.diagnostics.act[j] = detail::ar1_time(run.diagnostics.lag1[j]);
  }
  run.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

/// (1/J) sum_k H(theta_k) over kept samples.
inline Eigen::VectorXd ergodic_average(const ChainRun& run,
                                       const std::function<Eigen::VectorXd(const PotentialVec&)>& H) {
  if (run.samples.empty()) throw InvalidArgument("ergodic_average: no kept samples");
  Eigen::VectorXd acc = H(run.samples.front());
  for (std::size_t i = 1; i < run.samples.size(); ++i) acc += H(run.samples[i]);
  return acc / static_cast<double>(run.samples.size());
}

/// Posterior mean of the coordinates.
inline Eigen::VectorXd sample_mean(const ChainRun& run) {
  return ergodic_average(run, [](const PotentialVec& w) { return w.values; });
}

/// Monte-Carlo standard error of the mean of a scalar series, inflated by the
/// AR(1) autocorrelation-time estimate.
inline double ar1_standard_error(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 3) throw InvalidArgument("ar1_standard_error: need at least 3 values");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n - 1.0;
  return std::sqrt(var / n * detail::ar1_time(detail::lag1_autocorrelation(x)));
}

/// Stationary variance of ULA on N(0, sigma2) in one coordinate:
/// v = (1 - gamma/sigma2)^2 v + 2 gamma.
inline double ula_gaussian_variance(double sigma2, double gamma) {
  return sigma2 / (1.0 - gamma / (2.0 * sigma2));
}

/// Target exp(l~_N(W) - 1/2 W^T Sigma^{-1} W): drift grad l~_N - Sigma^{-1} W,
/// energy -l~_N + 1/2 W^T Sigma^{-1} W. `data` must outlive the target.
inline Target surrogate_posterior_target(const McKVProblem& base, const Dataset& data, const PriorSpec& prior,
                                         const SurrogateSpec& spec) {
  if (prior.dim() != spec.W_init.size()) throw InvalidArgument("surrogate_posterior_target: prior dimension differs");
  auto tail = std::make_shared<TailPenalty>(spec.r);
  const Eigen::VectorXd prec = prior.precision();
  auto cache = std::make_shared<std::optional<DesignCache>>();
  return [base, &data, spec, tail, prec, cache](const PotentialVec& W) {
    const McKVProblem p = base.with_W(W);
    if (!cache->has_value()) cache->emplace(data, solve_mckv(p));
    const SurrogateEval ev = surrogate_loglik(p, data, spec, *tail, &**cache);
    const Eigen::VectorXd pw = (prec.array() * W.values.array()).matrix();
    return DriftEval{ev.gradient - pw, -ev.value + 0.5 * W.values.dot(pw)};
  };
}

/// Prior-only Gaussian target N(0, Sigma).
inline Target gaussian_target(const Eigen::VectorXd& precision) {
  return [precision](const PotentialVec& W) {
    if (W.size() != precision.size()) throw InvalidArgument("gaussian_target: dimension mismatch");
    const Eigen::VectorXd pw = (precision.array() * W.values.array()).matrix();
    return DriftEval{-pw, 0.5 * W.values.dot(pw)};
  };
}

/// Energy trace stays bounded: the maximum over the second half of the run
/// does not exceed `factor` times the range seen over the first half.
inline bool energy_bounded(const std::vector<double>& energy, double factor = 10.0) {
  if (energy.size() < 4) return true;
  const std::size_t h = energy.size() / 2;
  double lo = energy[0], hi = energy[0], late = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < energy.size(); ++i) {
    if (!std::isfinite(energy[i])) return false;
    if (i < h) {
      lo = std::min(lo, energy[i]);
      hi = std::max(hi, energy[i]);
    } else {
      late = std::max(late, energy[i]);
    }
  }
  return late <= hi + factor * std::max(hi - lo, 1.0);
}

/// CSV of kept samples (one row per iterate, D columns) and a JSON sidecar of
/// diagnostics.
inline void write_chain(const std::filesystem::path& base, const ChainRun& run) {
  {
    auto os = detail::open_out(base.string() + "_samples.csv");
    const Eigen::Index D = run.W_init.size();
    for (Eigen::Index j = 0; j < D; ++j) os << (j ? "," : "") << "w" << j;
    os << "\n";
    for (const auto& s : run.samples) {
      for (Eigen::Index j = 0; j < D; ++j) os << (j ? "," : "") << s.values[j];
      os << "\n";
    }
  }
  const auto& dg = run.diagnostics;
  {
    // per-step trace as tidy CSV; energy is empty when the target does not report it
    auto os = detail::open_out(base.string() + "_trace.csv");
    os << "step,drift_norm,energy\n";
    for (std::size_t k = 0; k < dg.drift_norms.size(); ++k) {
      os << k + 1 << "," << dg.drift_norms[k] << ",";
      if (k < dg.energy.size() && std::isfinite(dg.energy[k])) os << dg.energy[k];
      os << "\n";
    }
  }
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  const nlohmann::json j = {{"K", run.W_init.K},
                            {"d", run.W_init.d},
                            {"W_init", vec(run.W_init.values)},
                            {"seed", run.seed},
                            {"gamma", dg.gamma},
                            {"burn_in", run.burn_in},
                            {"thin", run.thin},
                            {"kept", run.kept},
                            {"lag1", vec(dg.lag1)},
                            {"act", vec(dg.act)}};
  auto os = detail::open_out(base.string() + "_diagnostics.json");
  os << j.dump(2) << "\n";
}

inline ChainRun read_chain(const std::filesystem::path& base) {
  nlohmann::json j;
  {
    auto is = detail::open_in(base.string() + "_diagnostics.json");
    is >> j;
  }
  ChainRun run;
  const int K = j.at("K").get<int>(), d = j.at("d").get<int>();
  const auto w0 = j.at("W_init").get<std::vector<double>>();
  run.W_init = PotentialVec(K, d, Eigen::Map<const Eigen::VectorXd>(w0.data(), static_cast<Eigen::Index>(w0.size())));
  run.seed = j.at("seed").get<std::uint64_t>();
  run.burn_in = j.at("burn_in").get<int>();
  run.thin = j.at("thin").get<int>();
  run.diagnostics.gamma = j.at("gamma").get<double>();
  auto is = detail::open_in(base.string() + "_samples.csv");
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    PotentialVec w(K, d);
    Eigen::Index i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= w.size()) throw InvalidArgument("read_chain: too many columns");
      w.values[i++] = std::stod(cell);
    }
    if (i != w.size()) throw InvalidArgument("read_chain: too few columns");
    run.samples.push_back(std::move(w));
  }
  run.kept = static_cast<int>(run.samples.size());
  if (run.kept != j.at("kept").get<int>()) throw InvalidArgument("read_chain: sample count mismatch");
  return run;
}

}  // namespace mckv
