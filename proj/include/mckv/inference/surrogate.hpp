#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "mckv/inference/likelihood.hpp"

namespace mckv {

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
template <int N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendre() {
    for (int i = 0; i < (N + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[static_cast<std::size_t>(i)] = -z;
      x[static_cast<std::size_t>(N - 1 - i)] = z;
      const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
      w[static_cast<std::size_t>(i)] = wi;
      w[static_cast<std::size_t>(N - 1 - i)] = wi;
    }
  }
};

inline double smooth_psi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
inline double smooth_psi_prime(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

}  // namespace detail

inline constexpr int kMollifierNodes = 64;

/// gamma~_r(t) = 0 for t < 5r/8, (t - 5r/8)^2 otherwise.
inline double gamma_tilde(double t, double r) {
  const double u = t - 0.625 * r;
  return u > 0.0 ? u * u : 0.0;
}

inline double gamma_tilde_prime(double t, double r) {
  const double u = t - 0.625 * r;
  return u > 0.0 ? 2.0 * u : 0.0;
}

/// gamma_r = phi_{r/8} * gamma~_r with the bump phi(x) = c exp(-1/(1-x^2)) on
/// (-1, 1), the convolution evaluated by a fixed 64-point Gauss-Legendre rule
/// (the normalisation constant c uses the same rule). A positive combination
/// of shifted convex functions, hence convex and nondecreasing.
class TailPenalty {
 public:
  explicit TailPenalty(double r) : r_(r) {
    if (!(r > 0.0)) throw InvalidArgument("TailPenalty: r must be positive");
    static const detail::GaussLegendre<kMollifierNodes> gl;
    double total = 0.0;
    for (int i = 0; i < kMollifierNodes; ++i) {
      const double x = gl.x[static_cast<std::size_t>(i)];
      weight_[static_cast<std::size_t>(i)] = gl.w[static_cast<std::size_t>(i)] * std::exp(-1.0 / (1.0 - x * x));
      total += weight_[static_cast<std::size_t>(i)];
      shift_[static_cast<std::size_t>(i)] = r / 8.0 * x;
    }
    for (double& w : weight_) w /= total;
  }

  double r() const { return r_; }

  double value(double t) const {
    double acc = 0.0;
    for (int i = 0; i < kMollifierNodes; ++i)
      acc += weight_[static_cast<std::size_t>(i)] * gamma_tilde(t - shift_[static_cast<std::size_t>(i)], r_);
    return acc;
  }

  double derivative(double t) const {
    double acc = 0.0;
    for (int i = 0; i < kMollifierNodes; ++i)
      acc += weight_[static_cast<std::size_t>(i)] * gamma_tilde_prime(t - shift_[static_cast<std::size_t>(i)], r_);
    return acc;
  }

 private:
  double r_;
  std::array<double, kMollifierNodes> weight_{};
  std::array<double, kMollifierNodes> shift_{};
};

/// Smooth cutoff: 1 on [0, 3/4], 0 on [7/8, inf), built from exp(-1/x).
inline double cutoff_alpha(double t) {
  const double x = 8.0 * (0.875 - t);
  const double a = detail::smooth_psi(x), b = detail::smooth_psi(1.0 - x);
  return a / (a + b);
}

inline double cutoff_alpha_prime(double t) {
  const double x = 8.0 * (0.875 - t);
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = detail::smooth_psi(x), b = detail::smooth_psi(1.0 - x);
  const double da = detail::smooth_psi_prime(x), db = -detail::smooth_psi_prime(1.0 - x);
  const double s = a + b;
  return -8.0 * (da * s - a * (da + db)) / (s * s);
}

/// lambda_min = max(N log N / r^2, C N (c1 + 1)(1 + r^{-2})).
inline double lambda_min(double N, double r, double C_hat, double c1) {
  return std::max(N * std::log(N) / (r * r), C_hat * N * (c1 + 1.0) * (1.0 + 1.0 / (r * r)));
}

/// Surrogate log-likelihood parameters.
struct SurrogateSpec {
  double r = 1.0;  ///< ball radius
  PotentialVec W_init;
  double lambda = 0.0;

  void validate(double lambda_floor = 0.0) const {
    if (!(r > 0.0)) throw InvalidArgument("SurrogateSpec: r must be positive");
    if (!(lambda >= lambda_floor))
      throw InvalidArgument("SurrogateSpec: lambda below lambda_min");
  }
};

struct SurrogateEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  double alpha = 0.0;    ///< cutoff weight at W
  double distance = 0.0; ///< ||W - W_init||
  bool solved = false;   ///< whether PDE solves were needed
};

/// l~_N(W) = alpha(||W - W_init|| / r) l_N(W) - lambda gamma_r(||W - W_init||)
/// and its gradient. No PDE is solved where the cutoff vanishes.
inline SurrogateEval surrogate_loglik(const McKVProblem& p, const Dataset& data, const SurrogateSpec& s,
                                      const TailPenalty& tail, const DesignCache* cache = nullptr) {
  if (std::abs(tail.r() - s.r) > 0.0) throw InvalidArgument("surrogate_loglik: tail penalty radius differs");
  SurrogateEval out;
  const Eigen::VectorXd diff = p.W.values - s.W_init.values;
  const double t = diff.norm();
  out.distance = t;
  out.alpha = cutoff_alpha(t / s.r);
  const Eigen::VectorXd u = t > 0.0 ? Eigen::VectorXd(diff / t) : Eigen::VectorXd::Zero(diff.size());
  out.value = -s.lambda * tail.value(t);
  out.gradient = -s.lambda * tail.derivative(t) * u;
  if (out.alpha > 0.0) {
    const LikelihoodEval ll = evaluate_log_likelihood(p, data, true, cache);
    out.solved = true;
    out.value += out.alpha * ll.value;
    out.gradient += out.alpha * *ll.gradient + cutoff_alpha_prime(t / s.r) / s.r * ll.value * u;
  }
  return out;
}

inline SurrogateEval surrogate_loglik(const McKVProblem& p, const Dataset& data, const SurrogateSpec& s) {
  return surrogate_loglik(p, data, s, TailPenalty(s.r));
}

/// Estimate of the local regularity constant: the largest of |G|, ||grad G||
/// and ||Hess G|| (operator norm) of G = W -> rho_W(t, x) over probe
/// potentials and probe points.
inline double estimate_local_regularity(const McKVProblem& p, const std::vector<PotentialVec>& probes,
                                        const std::vector<std::pair<double, Point>>& points) {
  double best = 0.0;
  for (const auto& W : probes) {
    const McKVProblem q = p.with_W(W);
    const Trajectory rho = solve_mckv(q);
    const Jacobian J = jacobian_matrix(q, rho);
    const SecondDerivatives S = second_derivatives(q, rho, J);
    for (const auto& [t, x] : points) {
      best = std::max(best, std::abs(rho.eval(t, x)));
      Eigen::VectorXd g(J.dim());
      for (Eigen::Index k = 0; k < J.dim(); ++k) g[k] = J.columns[static_cast<std::size_t>(k)].eval(t, x);
      best = std::max(best, g.norm());
      Eigen::MatrixXd H(J.dim(), J.dim());
      for (Eigen::Index j = 0; j < J.dim(); ++j)
        for (Eigen::Index k = j; k < J.dim(); ++k) H(j, k) = H(k, j) = S.at(j, k).eval(t, x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
      best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
    }
  }
  return best;
}

}  // namespace mckv
