#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mckv/forward/densities.hpp"
#include "mckv/inference/constants.hpp"
#include "mckv/parabolic/stepper.hpp"
#include "mckv/spectral/basis.hpp"

namespace mckv {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Initial density. kind "power_decay": phi^_k = amplitude |k|^{-zeta} for
/// k != 0 (|k| <= kmax when kmax >= 0), phi^_0 = 1; kind "uniform": phi = 1.
struct PhiConfig {
  std::string kind = "power_decay";
  double amplitude = 0.5;
  double zeta = 2.0;
  int kmax = -1;
};

/// True interaction potential. Either explicit coordinates in the tau basis
/// of E_K (K = this K), or random coordinates a_k = amplitude (1+|k|^2)^{-decay/2} u_k,
/// u_k ~ U[-1, 1], drawn with `seed`.
struct W0Config {
  int K = 4;
  std::vector<double> coords;  ///< explicit coordinates (empty: random)
  std::uint64_t seed = 7;
  double amplitude = 1.0;
  double decay = 2.0;
};

struct ProblemConfig {
  int d = 1;
  int n = 64;      ///< spatial grid points per axis
  double T = 0.5;  ///< time horizon (dimensionless, unit diffusivity)
  int K = 4;       ///< cutoff of the inferred potential space
  PhiConfig phi;
  W0Config W0;
};

struct InferenceConfig {
  int N = 2000;
  double alpha = 1.0;  ///< prior smoothness (experimental mode)
  double noise_std = 0.05;
  std::optional<int> data_n;  ///< grid used to generate data (default: problem.n)
  std::optional<int> data_M;  ///< time steps used to generate data (default: solver.M)
};

struct SurrogateConfig {
  double r = 1.0;        ///< ball radius in experimental mode (r_max = 1)
  double r_tilde = 1.0;  ///< strict mode: r = r_tilde D^{-w}
  std::optional<double> lambda;  ///< default: lambda_min
  double C_hat = 0.0;
  std::optional<double> c1;  ///< default: probe estimate
  std::string W_init = "oracle";          ///< "oracle" (W_{0,K}) or "coords"
  std::vector<double> W_init_coords;
};

struct SamplerConfig {
  int n_steps = 10000;
  std::optional<int> burn_in;  ///< default: 20% of n_steps
  int thin = 1;
  std::optional<double> gamma;  ///< default: 0.5 / (max precision + 2 lambda)
  std::string target = "posterior";  ///< "posterior" or "prior"
};

struct ConstantsBlock {
  ConstantsConfig values;
  std::optional<double> c_pr, c_err, cutoff_c;
};

struct ExperimentConfig {
  ProblemConfig problem;
  StepperConfig solver;
  ConstantsBlock constants;
  InferenceConfig inference;
  SurrogateConfig surrogate;
  SamplerConfig sampler;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  Mode mode() const { return constants.values.mode; }
  Grid grid() const { return Grid(problem.d, problem.n); }
  int D() const { return count_dim(problem.K, problem.d); }
  double prior_alpha() const { return mode() == Mode::strict ? constants.values.alpha : inference.alpha; }
};

namespace detail {

/// Reads keys of one JSON object, rejecting unknown keys.
class BlockReader {
 public:
  BlockReader(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }
  ~BlockReader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }
  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }
  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null() ? &j_.at(key) : nullptr;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(name_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  using detail::require;
  const auto& p = c.problem;
  require(p.d >= 1 && p.d <= 3, "problem.d must be 1, 2 or 3");
  require(p.n >= 4, "problem.n must be >= 4");
  require(p.T > 0.0, "problem.T must be positive");
  require(p.K >= 1 && 2 * p.K + 1 <= p.n, "problem.K must satisfy 1 <= K and 2K+1 <= n");
  require(p.phi.kind == "power_decay" || p.phi.kind == "uniform", "problem.phi.kind must be power_decay or uniform");
  require(p.W0.K >= 1 && 2 * p.W0.K + 1 <= p.n, "problem.W0.K must satisfy 1 <= K and 2K+1 <= n");
  require(p.W0.coords.empty() || static_cast<int>(p.W0.coords.size()) == count_dim(p.W0.K, p.d),
          "problem.W0.coords length must equal dim(E_K)");
  require(c.solver.M >= 1, "solver.M must be >= 1");
  require(c.solver.pad >= 1.0, "solver.pad must be >= 1");
  require(c.inference.N >= 1, "inference.N must be >= 1");
  require(c.inference.noise_std >= 0.0, "inference.noise_std must be >= 0");
  require(c.inference.alpha >= 0.0, "inference.alpha must be >= 0");
  require(!c.inference.data_n || (*c.inference.data_n >= 4 && 2 * p.W0.K + 1 <= *c.inference.data_n),
          "inference.data_n must be >= 4 and resolve W0");
  require(!c.inference.data_M || *c.inference.data_M >= 1, "inference.data_M must be >= 1");
  require(c.surrogate.r > 0.0 && c.surrogate.r_tilde > 0.0, "surrogate.r and surrogate.r_tilde must be positive");
  require(c.surrogate.W_init == "oracle" || c.surrogate.W_init == "coords", "surrogate.W_init must be oracle or coords");
  require(c.surrogate.W_init != "coords" || static_cast<int>(c.surrogate.W_init_coords.size()) == c.D(),
          "surrogate.W_init_coords length must equal dim(E_K)");
  require(!c.surrogate.lambda || *c.surrogate.lambda >= 0.0, "surrogate.lambda must be >= 0");
  require(c.sampler.n_steps >= 2, "sampler.n_steps must be >= 2");
  require(!c.sampler.burn_in || (*c.sampler.burn_in >= 0 && *c.sampler.burn_in < c.sampler.n_steps),
          "sampler.burn_in must lie in [0, n_steps)");
  require(c.sampler.thin >= 1, "sampler.thin must be >= 1");
  require(!c.sampler.gamma || *c.sampler.gamma > 0.0, "sampler.gamma must be positive");
  require(c.sampler.target == "posterior" || c.sampler.target == "prior", "sampler.target must be posterior or prior");
}

/// Parses a config object; absent keys keep their defaults.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::BlockReader;
  ExperimentConfig c;
  BlockReader top(j, "config");
  if (const auto* pj = top.child("problem")) {
    BlockReader r(*pj, "problem");
    r.get("d", c.problem.d);
    r.get("n", c.problem.n);
    r.get("T", c.problem.T);
    r.get("K", c.problem.K);
    if (const auto* f = r.child("phi")) {
      BlockReader q(*f, "problem.phi");
      q.get("kind", c.problem.phi.kind);
      q.get("amplitude", c.problem.phi.amplitude);
      q.get("zeta", c.problem.phi.zeta);
      q.get("kmax", c.problem.phi.kmax);
      q.finish();
    }
    if (const auto* w = r.child("W0")) {
      BlockReader q(*w, "problem.W0");
      q.get("K", c.problem.W0.K);
      q.get("coords", c.problem.W0.coords);
      q.get("seed", c.problem.W0.seed);
      q.get("amplitude", c.problem.W0.amplitude);
      q.get("decay", c.problem.W0.decay);
      q.finish();
    }
    r.finish();
  }
  if (const auto* sj = top.child("solver")) {
    BlockReader r(*sj, "solver");
    r.get("M", c.solver.M);
    std::string scheme = to_string(c.solver.scheme);
    r.get("scheme", scheme);
    try {
      c.solver.scheme = scheme_from_string(scheme);
    } catch (const Error& e) {
      throw ConfigError(std::string("solver.scheme: ") + e.what());
    }
    r.get("pad", c.solver.pad);
    r.get("tol_report", c.solver.tol_report);
    r.finish();
  }
  if (const auto* cj = top.child("constants")) {
    BlockReader r(*cj, "constants");
    auto& v = c.constants.values;
    r.get("alpha", v.alpha);
    r.get("beta", v.beta);
    r.get("zeta", v.zeta);
    r.get("w", v.w);
    std::string mode = to_string(v.mode);
    r.get("mode", mode);
    try {
      v.mode = mode_from_string(mode);
    } catch (const Error& e) {
      throw ConfigError(std::string("constants.mode: ") + e.what());
    }
    r.get("c_pr", c.constants.c_pr);
    r.get("c_err", c.constants.c_err);
    r.get("cutoff_c", c.constants.cutoff_c);
    r.finish();
  }
  if (const auto* ij = top.child("inference")) {
    BlockReader r(*ij, "inference");
    r.get("N", c.inference.N);
    r.get("alpha", c.inference.alpha);
    r.get("noise_std", c.inference.noise_std);
    r.get("data_n", c.inference.data_n);
    r.get("data_M", c.inference.data_M);
    r.finish();
  }
  if (const auto* sj = top.child("surrogate")) {
    BlockReader r(*sj, "surrogate");
    r.get("r", c.surrogate.r);
    r.get("r_tilde", c.surrogate.r_tilde);
    r.get("lambda", c.surrogate.lambda);
    r.get("C_hat", c.surrogate.C_hat);
    r.get("c1", c.surrogate.c1);
    if (const auto* w = r.child("W_init")) {
      if (w->is_string()) {
        c.surrogate.W_init = w->get<std::string>();
      } else if (w->is_array()) {
        c.surrogate.W_init = "coords";
        c.surrogate.W_init_coords = w->get<std::vector<double>>();
      } else {
        throw ConfigError("surrogate.W_init: expected \"oracle\" or an array of coordinates");
      }
    }
    r.finish();
  }
  if (const auto* sj = top.child("sampler")) {
    BlockReader r(*sj, "sampler");
    r.get("n_steps", c.sampler.n_steps);
    r.get("burn_in", c.sampler.burn_in);
    r.get("thin", c.sampler.thin);
    r.get("gamma", c.sampler.gamma);
    r.get("target", c.sampler.target);
    r.finish();
  }
  if (const auto* oj = top.child("output")) {
    BlockReader r(*oj, "output");
    r.get("dir", c.output_dir);
    r.finish();
  }
  top.get("seed", c.seed);
  top.finish();
  c.constants.values.d = c.problem.d;
  validate(c);
  return c;
}

/// Canonical JSON of the effective configuration (all defaults filled in).
inline nlohmann::json to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
  const auto& p = c.problem;
  nlohmann::json W0 = {{"K", p.W0.K}, {"seed", p.W0.seed}, {"amplitude", p.W0.amplitude}, {"decay", p.W0.decay}};
  if (!p.W0.coords.empty()) W0["coords"] = p.W0.coords;
  return {
      {"problem",
       {{"d", p.d},
        {"n", p.n},
        {"T", p.T},
        {"K", p.K},
        {"phi", {{"kind", p.phi.kind}, {"amplitude", p.phi.amplitude}, {"zeta", p.phi.zeta}, {"kmax", p.phi.kmax}}},
        {"W0", W0}}},
      {"solver",
       {{"M", c.solver.M}, {"scheme", to_string(c.solver.scheme)}, {"pad", c.solver.pad}, {"tol_report", c.solver.tol_report}}},
      {"constants",
       {{"alpha", c.constants.values.alpha},
        {"beta", c.constants.values.beta},
        {"zeta", c.constants.values.zeta},
        {"w", c.constants.values.w},
        {"mode", to_string(c.mode())},
        {"c_pr", opt(c.constants.c_pr)},
        {"c_err", opt(c.constants.c_err)},
        {"cutoff_c", opt(c.constants.cutoff_c)}}},
      {"inference",
       {{"N", c.inference.N},
        {"alpha", c.inference.alpha},
        {"noise_std", c.inference.noise_std},
        {"data_n", opt(c.inference.data_n)},
        {"data_M", opt(c.inference.data_M)}}},
      {"surrogate",
       {{"r", c.surrogate.r},
        {"r_tilde", c.surrogate.r_tilde},
        {"lambda", opt(c.surrogate.lambda)},
        {"C_hat", c.surrogate.C_hat},
        {"c1", opt(c.surrogate.c1)},
        {"W_init", c.surrogate.W_init == "oracle" ? nlohmann::json("oracle") : nlohmann::json(c.surrogate.W_init_coords)}}},
      {"sampler",
       {{"n_steps", c.sampler.n_steps},
        {"burn_in", opt(c.sampler.burn_in)},
        {"thin", c.sampler.thin},
        {"gamma", opt(c.sampler.gamma)},
        {"target", c.sampler.target}}},
      {"output", {{"dir", c.output_dir}}},
      {"seed", c.seed},
  };
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

/// Initial density of the configured problem.
inline SpectralField make_phi(const ExperimentConfig& c, const Grid& g) {
  if (c.problem.phi.kind == "uniform") return uniform_density(g);
  try {
    return power_decay_density(g, c.problem.phi.amplitude, c.problem.phi.zeta, c.problem.phi.kmax);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("problem.phi: ") + e.what());
  }
}

/// True potential in E_{W0.K}.
inline PotentialVec make_W0(const ExperimentConfig& c) {
  const auto& w = c.problem.W0;
  PotentialVec W(w.K, c.problem.d);
  if (!w.coords.empty()) {
    for (Eigen::Index i = 0; i < W.size(); ++i) W.values[i] = w.coords[static_cast<std::size_t>(i)];
    return W;
  }
  std::mt19937_64 rng(w.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto modes = potential_modes(w.K, c.problem.d);
  for (std::size_t i = 0; i < modes.size(); ++i)
    W.values[static_cast<Eigen::Index>(i)] = w.amplitude * std::pow(1.0 + modes[i].norm2(), -w.decay / 2.0) * u(rng);
  return W;
}

}  // namespace mckv
