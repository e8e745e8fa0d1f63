#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mckv/forward/mckv.hpp"
#include "mckv/spectral/io.hpp"

namespace mckv {

/// Random-design regression data Y_i = rho_{W0}(t_i, X_i) + noise_std * eps_i.
struct Dataset {
  int d = 1;
  double T = 0.5;
  std::vector<double> Y;
  std::vector<double> t;
  std::vector<Point> X;
  std::uint64_t seed = 0;
  double noise_std = 1.0;
  nlohmann::json truth = nlohmann::json::object();  ///< W0 coordinates, phi spec, ...

  std::size_t N() const { return Y.size(); }

  void validate() const {
    if (Y.empty()) throw InvalidArgument("Dataset: N must be >= 1");
    if (t.size() != Y.size() || X.size() != Y.size()) throw InvalidArgument("Dataset: column lengths differ");
    for (std::size_t i = 0; i < N(); ++i) {
      if (!(t[i] >= 0.0 && t[i] <= T)) throw InvalidArgument("Dataset: t_i outside [0, T]");
      for (int j = 0; j < d; ++j)
        if (!(X[i][j] >= 0.0 && X[i][j] < 1.0)) throw InvalidArgument("Dataset: X_i outside [0,1)^d");
    }
  }
};

/// Per-datum interpolation weights and spatial phase tables, so trajectories
/// sharing a time grid can be evaluated at all design points cheaply.
class DesignCache {
 public:
  DesignCache(const Dataset& data, const Trajectory& like) : grid_(like.grid()), M_(like.M), T_(like.T) {
    data.validate();
    if (std::abs(data.T - like.T) > 1e-14 * std::max(1.0, data.T))
      throw GridMismatch("DesignCache: dataset horizon differs from trajectory horizon");
    const std::size_t size = grid_.size();
    phases_.resize(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(data.N()));
    entries_.reserve(data.N());
    for (std::size_t i = 0; i < data.N(); ++i) {
      const auto [m, w] = like.locate(data.t[i]);
      entries_.push_back({m, w});
      const PointPhases ph(grid_, data.X[i]);
      for (std::size_t j = 0; j < size; ++j)
        phases_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = ph.phase(grid_.mode(j));
    }
  }

  std::size_t size() const { return entries_.size(); }

  /// tr(t_i, X_i) for every datum.
  Eigen::VectorXd evaluate(const Trajectory& tr) const {
    check(tr);
    Eigen::VectorXd out(static_cast<Eigen::Index>(entries_.size()));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      const auto col = phases_.col(static_cast<Eigen::Index>(i));
      const double a = dot(tr.nodes[static_cast<std::size_t>(e.m)], col);
      const double b = dot(tr.nodes[static_cast<std::size_t>(e.m + 1)], col);
      out[static_cast<Eigen::Index>(i)] = (1.0 - e.w) * a + e.w * b;
    }
    return out;
  }

  /// Per-node coefficients A_m = sum_i r_i w_im e_i, so that
  /// sum_i r_i tr(t_i, X_i) = apply(tr, A) for any trajectory tr.
  std::vector<Eigen::VectorXcd> adjoint(const Eigen::VectorXd& r) const {
    if (r.size() != static_cast<Eigen::Index>(entries_.size())) throw InvalidArgument("DesignCache: weight count");
    std::vector<Eigen::VectorXcd> A(static_cast<std::size_t>(M_ + 1),
                                    Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid_.size())));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      const double ri = r[static_cast<Eigen::Index>(i)];
      A[static_cast<std::size_t>(e.m)] += (ri * (1.0 - e.w)) * phases_.col(static_cast<Eigen::Index>(i));
      A[static_cast<std::size_t>(e.m + 1)] += (ri * e.w) * phases_.col(static_cast<Eigen::Index>(i));
    }
    return A;
  }

  double apply(const Trajectory& tr, const std::vector<Eigen::VectorXcd>& A) const {
    check(tr);
    double acc = 0.0;
    for (std::size_t m = 0; m < A.size(); ++m) acc += dot(tr.nodes[m], A[m]);
    return acc;
  }

 private:
  struct Entry {
    int m;
    double w;
  };

  template <class V>
  static double dot(const SpectralField& f, const V& phases) {
    const auto c = f.data();
    const Eigen::Map<const Eigen::VectorXcd> cv(c.data(), static_cast<Eigen::Index>(c.size()));
    return (cv.array() * phases.array()).real().sum();
  }

  void check(const Trajectory& tr) const {
    if (tr.M != M_ || std::abs(tr.T - T_) > 1e-14 * std::max(1.0, T_))
      throw GridMismatch("DesignCache: trajectory time grid differs");
    require_same_grid(grid_, tr.grid(), "DesignCache");
  }

  Grid grid_;
  int M_;
  double T_;
  std::vector<Entry> entries_;
  Eigen::MatrixXcd phases_;  ///< e^{2 pi i k.X_i}, one column per datum
};

/// Draws t_i ~ U[0, T], X_i ~ U(T^d), Y_i = rho(t_i, X_i) + noise_std eps_i.
inline Dataset generate_data(const Trajectory& rho, int N, double noise_std, std::mt19937_64& rng) {
  if (N < 1) throw InvalidArgument("generate_data: N must be >= 1");
  if (!(noise_std >= 0.0)) throw InvalidArgument("generate_data: noise_std must be >= 0");
  Dataset data;
  data.d = rho.grid().d;
  data.T = rho.T;
  data.noise_std = noise_std;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> n01;
  for (int i = 0; i < N; ++i) {
    data.t.push_back(rho.T * unif(rng));
    Point x{};
    for (int j = 0; j < data.d; ++j) x[j] = unif(rng);
    data.X.push_back(x);
  }
  std::vector<double> eps(static_cast<std::size_t>(N));
  for (double& e : eps) e = n01(rng);
  data.Y.assign(static_cast<std::size_t>(N), 0.0);
  const Eigen::VectorXd clean = DesignCache(data, rho).evaluate(rho);
  for (int i = 0; i < N; ++i) data.Y[static_cast<std::size_t>(i)] = clean[i] + noise_std * eps[static_cast<std::size_t>(i)];
  return data;
}

/// Solves the forward problem for the truth and draws a dataset from it.
inline Dataset generate_data(const McKVProblem& truth, int N, double noise_std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset data = generate_data(solve_mckv(truth), N, noise_std, rng);
  data.seed = seed;
  data.truth = {{"W0", std::vector<double>(truth.W.values.data(), truth.W.values.data() + truth.W.size())},
                {"K", truth.W.K},
                {"grid", {{"d", truth.grid().d}, {"n", truth.grid().n}}},
                {"M", truth.stepper.M}};
  return data;
}

/// CSV (Y, t, X_1..X_d) with a JSON sidecar {d, T, N, seed, noise_std, truth}.
inline void write_dataset(const std::filesystem::path& base, const Dataset& data) {
  {
    auto os = detail::open_out(base.string() + ".csv");
    os << "Y,t";
    for (int j = 0; j < data.d; ++j) os << ",X_" << (j + 1);
    os << "\n";
    for (std::size_t i = 0; i < data.N(); ++i) {
      os << data.Y[i] << "," << data.t[i];
      for (int j = 0; j < data.d; ++j) os << "," << data.X[i][j];
      os << "\n";
    }
  }
  nlohmann::json meta = {{"d", data.d},     {"T", data.T},         {"N", data.N()},
                         {"seed", data.seed}, {"noise_std", data.noise_std}, {"truth", data.truth}};
  auto os = detail::open_out(base.string() + ".json");
  os << meta.dump(2) << "\n";
}

inline Dataset read_dataset(const std::filesystem::path& base) {
  nlohmann::json meta;
  {
    auto is = detail::open_in(base.string() + ".json");
    is >> meta;
  }
  Dataset data;
  data.d = meta.at("d").get<int>();
  data.T = meta.at("T").get<double>();
  data.seed = meta.value("seed", std::uint64_t{0});
  data.noise_std = meta.value("noise_std", 1.0);
  data.truth = meta.value("truth", nlohmann::json::object());
  auto is = detail::open_in(base.string() + ".csv");
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<int>(v.size()) != 2 + data.d) throw InvalidArgument("read_dataset: malformed row");
    data.Y.push_back(v[0]);
    data.t.push_back(v[1]);
    Point x{};
    for (int j = 0; j < data.d; ++j) x[j] = v[2 + j];
    data.X.push_back(x);
  }
  if (data.N() != meta.at("N").get<std::size_t>()) throw InvalidArgument("read_dataset: row count mismatch");
  data.validate();
  return data;
}

}  // namespace mckv
