#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mckv/parabolic/linear.hpp"
#include "mckv/parabolic/stepper.hpp"
#include "mckv/spectral/basis.hpp"

namespace mckv {

/// Tolerance on the mass of the initial density.
inline constexpr double kMassTolerance = 1e-12;

/// McKean-Vlasov forward problem
///   d/dt rho = Lap rho + div(rho grad W * rho),  rho(0) = phi,  t in [0, T].
struct McKVProblem {
  PotentialVec W;
  SpectralField phi;
  double T = 0.5;
  StepperConfig stepper;

  const Grid& grid() const { return phi.grid(); }

  void validate() const {
    if (phi.empty()) throw InvalidArgument("McKVProblem: phi is empty");
    if (std::abs(phi.mean() - 1.0) > kMassTolerance)
      throw InvalidArgument("McKVProblem: phi must have unit mass");
    if (phi.symmetry_defect() > 0.0) throw InvalidArgument("McKVProblem: phi must be real");
    if (W.d != phi.grid().d) throw GridMismatch("McKVProblem: W and phi dimensions differ");
    require_representable(W.K, phi.grid(), "McKVProblem");
    if (!(T > 0.0)) throw InvalidArgument("McKVProblem: T must be positive");
    stepper.validate();
  }

  McKVProblem with_W(PotentialVec w) const {
    McKVProblem p = *this;
    p.W = std::move(w);
    return p;
  }
};

/// T(r, V, s) = div(r grad V * s), products dealiased on an m^d grid.
inline SpectralField trilinear_T(const SpectralField& r, const SpectralField& V,
                                 const SpectralField& s, int m) {
  require_same_grid(r.grid(), V.grid(), "trilinear_T");
  require_same_grid(r.grid(), s.grid(), "trilinear_T");
  const VectorField v = gradient(convolve(V, s));
  return flux_divergence({{r, v}}, m);
}

inline SpectralField trilinear_T(const SpectralField& r, const SpectralField& V,
                                 const SpectralField& s) {
  return trilinear_T(r, V, s, padded_size(r.grid(), 1.5));
}

/// Solves the McKean-Vlasov equation for an arbitrary (not necessarily
/// mean-zero) interaction field W.
inline Trajectory solve_mckv_field(const SpectralField& W, const SpectralField& phi, double T,
                                   const StepperConfig& cfg) {
  require_same_grid(W.grid(), phi.grid(), "solve_mckv");
  const int m_pad = padded_size(phi.grid(), cfg.pad);
  const StageRhs rhs = [&](int, int, double, const SpectralField& u) {
    return trilinear_T(u, W, u, m_pad);
  };
  return integrate(phi, T, rhs, cfg);
}

inline Trajectory solve_mckv(const McKVProblem& p) {
  p.validate();
  return solve_mckv_field(synthesize(p.W, p.grid()), p.phi, p.T, p.stepper);
}

namespace detail {
// Builds a trajectory of forcing terms evaluated on every node and, when the
// coefficient trajectories carry them, on every recorded stage.
template <class Fn>
Trajectory forcing_trajectory(const Trajectory& like, Fn&& fn) {
  Trajectory f;
  f.T = like.T;
  f.M = like.M;
  f.scheme = like.scheme;
  f.nodes.reserve(like.nodes.size());
  for (std::size_t i = 0; i < like.nodes.size(); ++i) f.nodes.push_back(fn(false, i));
  for (std::size_t i = 0; i < like.stages.size(); ++i) f.stages.push_back(fn(true, i));
  return f;
}

inline const SpectralField& pick(const Trajectory& tr, bool stage, std::size_t i) {
  return stage ? tr.stages[i] : tr.nodes[i];
}
}  // namespace detail

/// First Frechet derivative D rho_W[H]: solves (d/dt - L_W) v = T(rho, H, rho),
/// v(0) = 0, with rho = solve_mckv(problem).
inline Trajectory mckv_first_derivative(const McKVProblem& p, const PotentialVec& H,
                                        const Trajectory& rho) {
  require_same_grid(p.grid(), rho.grid(), "mckv_first_derivative");
  const Grid& g = p.grid();
  const SpectralField Hf = synthesize(H, g);
  const SpectralField Wf = synthesize(p.W, g);
  const int m_pad = padded_size(g, p.stepper.pad);
  const Trajectory forcing = detail::forcing_trajectory(rho, [&](bool st, std::size_t i) {
    const auto& r = detail::pick(rho, st, i);
    return trilinear_T(r, Hf, r, m_pad);
  });
  return solve_linear_LW(Wf, rho, &forcing, SpectralField(g), p.stepper);
}

/// Second Frechet derivative D^2 rho_W[H1, H2] from cached first derivatives.
/// Forcing:
///   T(d2, H1, rho) + T(rho, H1, d2) + T(d1, H2, rho) + T(rho, H2, d1)
///   + T(d1, W, d2) + T(d2, W, d1)
/// summed pairwise so swapping (H1, d1) <-> (H2, d2) gives identical bits.
inline Trajectory mckv_second_derivative(const McKVProblem& p, const PotentialVec& H1,
                                         const PotentialVec& H2, const Trajectory& rho,
                                         const Trajectory& dH1, const Trajectory& dH2) {
  rho.check_compatible(dH1, "mckv_second_derivative");
  rho.check_compatible(dH2, "mckv_second_derivative");
  if (rho.has_stages() != dH1.has_stages() || rho.has_stages() != dH2.has_stages())
    throw GridMismatch("mckv_second_derivative: stage records differ");
  const Grid& g = p.grid();
  const SpectralField H1f = synthesize(H1, g);
  const SpectralField H2f = synthesize(H2, g);
  const SpectralField Wf = synthesize(p.W, g);
  const int m_pad = padded_size(g, p.stepper.pad);

  const Trajectory forcing = detail::forcing_trajectory(rho, [&](bool st, std::size_t i) {
    const auto& r = detail::pick(rho, st, i);
    const auto& d1 = detail::pick(dH1, st, i);
    const auto& d2 = detail::pick(dH2, st, i);
    // grad(H1 * d2) etc. shared by the two flux terms of each pair
    const VectorField gH1r = gradient(convolve(H1f, r));
    const VectorField gH1d2 = gradient(convolve(H1f, d2));
    const VectorField gH2r = gradient(convolve(H2f, r));
    const VectorField gH2d1 = gradient(convolve(H2f, d1));
    const VectorField gWd2 = gradient(convolve(Wf, d2));
    const VectorField gWd1 = gradient(convolve(Wf, d1));
    SpectralField a = flux_divergence({{d2, gH1r}, {r, gH1d2}}, m_pad);
    const SpectralField b = flux_divergence({{d1, gH2r}, {r, gH2d1}}, m_pad);
    const SpectralField c1 = flux_divergence({{d1, gWd2}}, m_pad);
    const SpectralField c2 = flux_divergence({{d2, gWd1}}, m_pad);
    a += b;
    SpectralField c = c1 + c2;
    a += c;
    return a;
  });
  return solve_linear_LW(Wf, rho, &forcing, SpectralField(g), p.stepper);
}

/// Columns D rho_W[tau_k] for every basis function of E_K, sharing one rho.
struct Jacobian {
  std::vector<ModeIndex> modes;
  std::vector<Trajectory> columns;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(columns.size()); }
};

inline Jacobian jacobian_matrix(const McKVProblem& p, const Trajectory& rho) {
  Jacobian J;
  J.modes = p.W.modes();
  J.columns.reserve(J.modes.size());
  for (std::size_t i = 0; i < J.modes.size(); ++i)
    J.columns.push_back(
        mckv_first_derivative(p, PotentialVec::unit(p.W.K, p.W.d, static_cast<Eigen::Index>(i)), rho));
  return J;
}

/// G_jk = <col_j, col_k>_{L^2([0,T]; L^2)}.
inline Eigen::MatrixXd gram_matrix(const Jacobian& J) {
  const Eigen::Index D = J.dim();
  Eigen::MatrixXd G(D, D);
  for (Eigen::Index j = 0; j < D; ++j)
    for (Eigen::Index k = j; k < D; ++k) {
      const double v = l2l2_inner(J.columns[static_cast<std::size_t>(j)],
                                  J.columns[static_cast<std::size_t>(k)]);
      G(j, k) = v;
      G(k, j) = v;
    }
  return G;
}

}  // namespace mckv
