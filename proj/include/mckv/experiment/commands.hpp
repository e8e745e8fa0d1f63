#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mckv/experiment/config.hpp"
#include "mckv/experiment/hash.hpp"
#include "mckv/experiment/verify.hpp"
#include "mckv/parabolic/io.hpp"

namespace mckv {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitVerification = 2, kExitNumerical = 3 };

/// Smallest value of r below which the strict-mode radius is reported as
/// numerically meaningless.
inline constexpr double kTinyRadius = 1e-6;
/// Threshold on the smallest eigenvalue of the expected Hessian at W_{0,K}
/// below which the problem is flagged non-identifiable.
inline constexpr double kIdentifiabilityFloor = 1e-12;

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report = nlohmann::json::object();
};

/// Config hash: git blob hash of the canonical effective config, without the
/// output location so that relocated reruns share it.
inline std::string config_hash(const ExperimentConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("output");
  return git_blob_hash(j.dump());
}

inline McKVProblem make_problem(const ExperimentConfig& c, const PotentialVec& W, int n, int M) {
  McKVProblem p;
  const Grid g(c.problem.d, n);
  p.phi = make_phi(c, g);
  p.W = W;
  p.T = c.problem.T;
  p.stepper = c.solver;
  p.stepper.M = M;
  p.validate();
  return p;
}

inline McKVProblem make_problem(const ExperimentConfig& c, const PotentialVec& W) {
  return make_problem(c, W, c.problem.n, c.solver.M);
}

inline PotentialVec truth_in_EK(const ExperimentConfig& c) { return embed(make_W0(c), c.problem.K); }

inline bool is_uniform(const SpectralField& phi) {
  const auto data = phi.data();
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!phi.grid().mode(i).is_zero() && data[i] != cplx{0.0, 0.0}) return false;
  return true;
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Surrogate radius: r_tilde D^{-w} in strict mode, r otherwise.
inline double surrogate_radius(const ExperimentConfig& c) {
  return c.mode() == Mode::strict ? c.surrogate.r_tilde * std::pow(c.D(), -c.constants.values.w) : c.surrogate.r;
}

namespace detail {

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  auto os = open_out(p);
  os << j.dump(2) << "\n";
}

/// Derived quantities available without solving: D, delta_N, the surrogate
/// radius and lambda_min (with c1 from the config, 0 when unset).
inline nlohmann::json basic_derived(const ExperimentConfig& c) {
  const double r = surrogate_radius(c);
  const double c1 = c.surrogate.c1.value_or(0.0);
  return {{"D", c.D()},
          {"delta_N", delta_N(c.prior_alpha(), c.problem.d, c.inference.N)},
          {"prior_alpha", c.prior_alpha()},
          {"r", r},
          {"lambda_min", lambda_min(c.inference.N, r, c.surrogate.C_hat, c1)},
          {"c1", c1}};
}

/// Writes report.json, then manifest.json with the effective config, its
/// hash and the git blob hash of every artifact in `dir`.
inline void finalize(const std::filesystem::path& dir, const ExperimentConfig& c, const std::string& command,
                     const nlohmann::json& report, double seconds) {
  write_json(dir / "report.json", report);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  nlohmann::json artifacts = nlohmann::json::object();
  for (const auto& f : files) artifacts[std::filesystem::relative(f, dir).generic_string()] = file_blob_hash(f);
  nlohmann::json derived = basic_derived(c);
  if (report.contains("derived")) derived.update(report["derived"]);
  write_json(dir / "manifest.json", {{"command", command},
                                     {"config", to_json(c)},
                                     {"config_hash", config_hash(c)},
                                     {"derived", derived},
                                     {"artifacts", artifacts},
                                     {"wall_seconds", seconds}});
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline nlohmann::json checks_json(const std::vector<CheckResult>& checks) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : checks) a.push_back(c);
  return a;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------- simulate

inline CommandResult cmd_simulate(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const PotentialVec W0 = make_W0(c);
  const McKVProblem p = make_problem(c, W0);
  const Trajectory rho = solve_mckv(p);
  write_trajectory(out / "rho", rho);

  CommandResult res;
  auto& r = res.report;
  r["command"] = "simulate";
  r["config_hash"] = config_hash(c);
  double mass = 0.0, dev_one = 0.0;
  const ModeIndex zero(c.problem.d, {});
  {
    auto csv = detail::open_out(out / "summary.csv");
    csv << "t,mass,l2_norm,l2_deviation_from_one\n";
    const SpectralField one = SpectralField::constant(p.grid(), 1.0);
    for (int m = 0; m <= rho.M; ++m) {
      const auto& f = rho.nodes[static_cast<std::size_t>(m)];
      const double mm = f[zero].real();
      const double dv = l2_norm(f - one);
      mass = std::max(mass, std::abs(mm - 1.0));
      dev_one = std::max(dev_one, dv);
      csv << rho.time(m) << "," << mm << "," << l2_norm(f) << "," << dv << "\n";
    }
  }
  r["max_mass_defect"] = mass;
  r["max_l2_deviation_from_one"] = dev_one;
  if (W0.values.isZero(0.0)) {
    Trajectory heat = rho;
    for (int m = 0; m <= heat.M; ++m) heat.nodes[static_cast<std::size_t>(m)] = heat_evolution(p.phi, heat.time(m));
    r["heat_limit"] = {{"relative_l2l2_error", relative_l2l2(rho, heat)}};
  }
  const bool uniform = is_uniform(p.phi);
  r["uniform_steady_state"] = uniform;
  if (uniform) r["flags"] = {"uniform steady state: rho_W = 1 for every W, potential non-identifiable"};
  detail::finalize(out, c, "simulate", r, detail::seconds_since(t0));
  return res;
}

// ------------------------------------------------------------------ verify

inline std::vector<CheckResult> suite_gradients(const ExperimentConfig& c, int pairs = 3) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(c.seed);
  const int K = c.problem.K, d = c.problem.d;
  for (int i = 0; i < pairs; ++i) {
    const McKVProblem p = make_problem(c, random_potential_uniform(K, d, rng));
    const PotentialVec H = random_potential_uniform(K, d, rng);
    const auto fd = first_derivative_check(p, H);
    out.push_back({"first_derivative_fd_" + std::to_string(i), fd.passed, fd.err_fine, fd.tolerance,
                   "slope=" + detail::fmt(fd.slope) + " floor=" + detail::fmt(fd.floor)});
  }
  {
    const McKVProblem p = make_problem(c, random_potential_uniform(K, d, rng));
    const auto sd = second_derivative_check(p, random_potential_uniform(K, d, rng), random_potential_uniform(K, d, rng));
    out.push_back({"second_derivative_symmetry", sd.symmetry <= 1e-10, sd.symmetry, 1e-10, ""});
    out.push_back({"second_derivative_fd", sd.fd_error <= 1e-3, sd.fd_error, 1e-3, ""});
  }
  {
    const McKVProblem truth = make_problem(c, truth_in_EK(c));
    const Dataset data = generate_data(truth, 50, 0.1, c.seed);
    const McKVProblem p = truth.with_W(truth.W + random_potential_uniform(K, d, rng, 0.3));
    const auto gc = likelihood_gradient_check(p, data);
    out.push_back({"likelihood_gradient_fd", gc.passed, gc.worst, 1e-3, "N=50"});
  }
  {
    const auto rd = rd_linearisation_check(make_phi(c, c.grid()), c.problem.T, c.solver);
    out.push_back({"reaction_diffusion_linearisation_fd", rd.err_fine <= rd.tolerance && std::abs(rd.slope - 2.0) <= 0.3,
                   rd.err_fine, rd.tolerance, "slope=" + detail::fmt(rd.slope)});
    out.push_back({"reaction_diffusion_linear_exact", rd.linear_exact_error <= 1e-8, rd.linear_exact_error, 1e-8, ""});
  }
  return out;
}

inline std::vector<CheckResult> suite_stability(const ExperimentConfig& c, nlohmann::json& info) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(c.seed);
  const McKVProblem p = make_problem(c, truth_in_EK(c));
  const Trajectory rho = solve_mckv(p);
  const auto gs = gradient_stability_sigma_min(p, rho);
  info["sigma_min"] = gs.sigma_min;
  info["gram_eigenvalues"] = to_vector(gs.eigenvalues);
  info["identifiable"] = gs.eigenvalues(0) / p.T > kIdentifiabilityFloor;
  const auto dm = deconvolution_margin(rho, c.problem.K, c.problem.phi.zeta);
  info["deconvolution_margin"] = dm.value;
  out.push_back({"sigma_min_finite_nonnegative", std::isfinite(gs.sigma_min) && gs.sigma_min >= 0.0, gs.sigma_min, 0.0,
                 "reported, not thresholded"});
  const Grid g = c.grid();
  const McKVProblem a = make_problem(c, random_potential_w2inf(c.problem.K, c.problem.d, g, rng));
  const McKVProblem b = a.with_W(random_potential_w2inf(c.problem.K, c.problem.d, g, rng));
  const auto pl = pseudo_linearisation_check(a, b);
  out.push_back({"pseudo_linearisation", pl.passed, pl.residual, 5.0 * pl.floor, "floor=" + detail::fmt(pl.floor)});
  const double lip = forward_lipschitz_probe(a, b, c.constants.values.beta);
  info["lipschitz_ratio"] = lip;
  out.push_back({"lipschitz_ratio_finite", std::isfinite(lip) && lip >= 0.0, lip, 0.0, ""});
  return out;
}

inline SurrogateSpec default_surrogate(const ExperimentConfig& c, const PotentialVec& W_init, double c1) {
  SurrogateSpec s;
  s.r = surrogate_radius(c);
  s.W_init = W_init;
  s.lambda = c.surrogate.lambda ? *c.surrogate.lambda : lambda_min(c.inference.N, s.r, c.surrogate.C_hat, c1);
  return s;
}

inline std::vector<CheckResult> suite_surrogate(const ExperimentConfig& c) {
  std::vector<CheckResult> out;
  const McKVProblem truth = make_problem(c, truth_in_EK(c));
  const Dataset data = generate_data(truth, std::min(c.inference.N, 200), c.inference.noise_std, c.seed);
  const SurrogateSpec s = default_surrogate(c, truth.W, c.surrogate.c1.value_or(0.0));
  const auto sc = surrogate_check(truth, data, s, 100, c.seed);
  out.push_back({"exact_inside_half_radius", sc.exactness_max_diff == 0.0, sc.exactness_max_diff, 0.0, "100 probes"});
  out.push_back({"tail_convex_nondecreasing", sc.min_second_difference >= -1e-10, sc.min_second_difference, -1e-10, ""});
  out.push_back({"gamma_tilde_at_5r_over_8", sc.gamma_tilde_at_5r8 == 0.0, sc.gamma_tilde_at_5r8, 0.0, ""});
  out.push_back({"gamma_tilde_at_9r_over_8", sc.gamma_tilde_at_9r8 == s.r * s.r / 4.0, sc.gamma_tilde_at_9r8,
                 s.r * s.r / 4.0, ""});
  out.push_back({"gradient_fd_in_annulus", sc.annulus_worst_rel <= 1e-3, sc.annulus_worst_rel, 1e-3, ""});
  return out;
}

inline std::vector<CheckResult> suite_sampler(const ExperimentConfig& c, int kept = 100000) {
  const PriorSpec prior = PriorSpec::make(c.prior_alpha(), c.problem.K, c.problem.d, c.inference.N);
  const double gamma = c.sampler.gamma.value_or(default_step_size(prior, 0.0));
  const auto gc = gaussian_ula_check(prior, gamma, kept, c.seed);
  return {{"gaussian_stationary_variance", gc.passed, gc.worst_z, 5.0,
           "max |empirical - predicted| / SE over modes, " + std::to_string(kept) + " kept samples"}};
}

inline CommandResult cmd_verify(const ExperimentConfig& c, const std::string& suite, const std::filesystem::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  static const std::vector<std::string> known = {"gradients", "stability", "surrogate", "sampler"};
  if (suite != "all" && std::find(known.begin(), known.end(), suite) == known.end())
    throw ConfigError("unknown suite: " + suite);
  CommandResult res;
  res.report["command"] = "verify";
  res.report["config_hash"] = config_hash(c);
  bool ok = true;
  for (const auto& name : known) {
    if (suite != "all" && suite != name) continue;
    std::vector<CheckResult> checks;
    nlohmann::json info = nlohmann::json::object();
    if (name == "gradients") checks = suite_gradients(c);
    if (name == "stability") checks = suite_stability(c, info);
    if (name == "surrogate") checks = suite_surrogate(c);
    if (name == "sampler") checks = suite_sampler(c);
    const bool passed = detail::all_passed(checks);
    ok = ok && passed;
    res.report["suites"][name] = {{"passed", passed}, {"checks", detail::checks_json(checks)}};
    if (!info.empty()) res.report["suites"][name]["info"] = info;
  }
  res.report["passed"] = ok;
  res.exit_code = ok ? kExitOk : kExitVerification;
  detail::finalize(out, c, "verify --suite " + suite, res.report, detail::seconds_since(t0));
  return res;
}

// --------------------------------------------------------------- gradcheck

inline CommandResult cmd_gradcheck(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(c.seed);
  const McKVProblem truth = make_problem(c, truth_in_EK(c));
  const Dataset data = generate_data(truth, std::min(c.inference.N, 50), std::max(c.inference.noise_std, 0.1), c.seed);
  const McKVProblem p = truth.with_W(truth.W + random_potential_uniform(c.problem.K, c.problem.d, rng, 0.3));
  const auto gc = likelihood_gradient_check(p, data);
  {
    auto csv = detail::open_out(out / "gradcheck.csv");
    csv << "coordinate,analytic,finite_difference,relative_error\n";
    for (Eigen::Index k = 0; k < gc.analytic.size(); ++k)
      csv << k << "," << gc.analytic[k] << "," << gc.fd[k] << "," << gc.rel[k] << "\n";
  }
  const auto fd = first_derivative_check(p, random_potential_uniform(c.problem.K, c.problem.d, rng));
  CommandResult res;
  std::vector<CheckResult> checks = {
      {"likelihood_gradient_fd", gc.passed, gc.worst, 1e-3, "N=" + std::to_string(data.N())},
      {"first_derivative_fd", fd.passed, fd.err_fine, fd.tolerance, "slope=" + detail::fmt(fd.slope)}};
  res.report = {{"command", "gradcheck"},
                {"config_hash", config_hash(c)},
                {"checks", detail::checks_json(checks)},
                {"passed", detail::all_passed(checks)}};
  res.exit_code = detail::all_passed(checks) ? kExitOk : kExitVerification;
  detail::finalize(out, c, "gradcheck", res.report, detail::seconds_since(t0));
  return res;
}

// --------------------------------------------------------------- stability

inline CommandResult cmd_stability(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(c.seed);
  const McKVProblem p1 = make_problem(c, truth_in_EK(c));
  const McKVProblem p2 = p1.with_W(p1.W + random_potential_uniform(c.problem.K, c.problem.d, rng, 0.1));
  const Trajectory rho = solve_mckv(p1);
  const auto gs = gradient_stability_sigma_min(p1, rho);
  StabilityReport sr;
  sr.sigma_min = gs.sigma_min;
  sr.decon_margin = deconvolution_margin(rho, c.problem.K, c.problem.phi.zeta).value;
  sr.lipschitz_ratio = forward_lipschitz_probe(p1, p2, c.constants.values.beta);
  sr.pseudo_lin_residual = pseudo_linearised_difference(p1, p2).residual;
  CommandResult res;
  res.report = {{"command", "stability"},
                {"config_hash", config_hash(c)},
                {"stability", sr},
                {"gram_eigenvalues", to_vector(gs.eigenvalues)},
                {"identifiable", gs.eigenvalues(0) / p1.T > kIdentifiabilityFloor},
                {"valid", sr.valid()}};
  res.exit_code = sr.valid() ? kExitOk : kExitVerification;
  detail::finalize(out, c, "stability", res.report, detail::seconds_since(t0));
  return res;
}

// --------------------------------------------------------- sample / recover

/// Everything needed to sample the surrogate posterior of a configured
/// experiment.
struct PosteriorSetup {
  ConstantsReport constants;
  std::vector<std::string> warnings;
  McKVProblem base;  ///< inference problem, W = W_{0,K}
  PotentialVec W0, W0K;
  Dataset data;
  PriorSpec prior;
  SurrogateSpec surrogate;
  double c1 = 0.0;
  double lambda_min_value = 0.0;
  double gamma = 0.0;
  int burn_in = 0;
  double hessian_min_eigenvalue = 0.0;
  bool non_identifiable = false;
};

inline PosteriorSetup prepare_posterior(const ExperimentConfig& c) {
  PosteriorSetup s;
  const int K = c.problem.K, d = c.problem.d, N = c.inference.N;
  s.W0 = make_W0(c);
  s.W0K = embed(s.W0, K);
  s.base = make_problem(c, s.W0K);
  const McKVProblem truth = make_problem(c, s.W0, c.inference.data_n.value_or(c.problem.n),
                                         c.inference.data_M.value_or(c.solver.M));
  s.data = generate_data(truth, N, c.inference.noise_std, c.seed);
  s.data.truth["phi"] = {{"kind", c.problem.phi.kind}, {"amplitude", c.problem.phi.amplitude}, {"zeta", c.problem.phi.zeta}};

  // (N, K)-dependent assumptions, evaluated numerically on the inference grid.
  const Trajectory rho0 = solve_mckv(make_problem(c, s.W0));
  const Trajectory rho0K = solve_mckv(s.base);
  AssumptionInputs a;
  a.N = N;
  a.K = K;
  a.D = c.D();
  a.c_pr = c.constants.c_pr;
  a.forward_bias = l2l2_distance(rho0, rho0K) / std::sqrt(c.problem.T);
  a.inverse_bias = (s.W0 - embed(s.W0K, s.W0.K)).values.norm();
  a.c_err = c.constants.c_err;
  a.cutoff_c = c.constants.cutoff_c;
  s.constants = validate_constants(c.constants.values, a);
  if (c.mode() == Mode::strict) {
    for (const auto& name : {"beta", "alpha", "zeta", "w"})
      if (!s.constants.find(name)->passed)
        throw ConfigError("strict mode: constants violate the admissible system (" + s.constants.find(name)->detail + ")");
  }
  for (const auto& f : s.constants.failures()) s.warnings.push_back("assumption check failed: " + f);

  const Eigen::MatrixXd H = gram_matrix(jacobian_matrix(s.base, rho0K)) / c.problem.T;
  s.hessian_min_eigenvalue = min_eigenvalue(H);
  s.non_identifiable = s.hessian_min_eigenvalue <= kIdentifiabilityFloor;
  if (s.non_identifiable)
    s.warnings.push_back("non-identifiable: expected Hessian at W_{0,K} is singular (min eigenvalue " +
                         detail::fmt(s.hessian_min_eigenvalue) + ")");

  s.prior = PriorSpec::make(c.prior_alpha(), K, d, N);
  PotentialVec W_init = s.W0K;
  if (c.surrogate.W_init == "coords")
    W_init = PotentialVec(K, d, Eigen::Map<const Eigen::VectorXd>(c.surrogate.W_init_coords.data(), c.D()));
  const double r = surrogate_radius(c);
  if (r < kTinyRadius)
    s.warnings.push_back("surrogate radius r = " + detail::fmt(r) +
                         " is astronomically small; the surrogate equals the likelihood only on a negligible ball");
  if (c.surrogate.c1) {
    s.c1 = *c.surrogate.c1;
  } else {
    std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<PotentialVec> probes = {W_init};
    for (int i = 0; i < 2; ++i) {
      PotentialVec u = random_potential_uniform(K, d, rng);
      u.values *= 0.5 * std::min(r, 1.0) / u.values.norm();
      probes.push_back(W_init + u);
    }
    std::vector<std::pair<double, Point>> pts;
    for (double t : {0.0, 0.5 * c.problem.T, c.problem.T})
      for (double x : {0.1, 0.4, 0.7}) {
        Point p{};
        for (int j = 0; j < d; ++j) p[j] = x;
        pts.push_back({t, p});
      }
    s.c1 = estimate_local_regularity(s.base, probes, pts);
  }
  s.lambda_min_value = lambda_min(N, r, c.surrogate.C_hat, s.c1);
  s.surrogate = default_surrogate(c, W_init, s.c1);
  if (s.surrogate.lambda < s.lambda_min_value)
    s.warnings.push_back("surrogate.lambda below lambda_min = " + detail::fmt(s.lambda_min_value));
  s.gamma = c.sampler.gamma.value_or(default_step_size(s.prior, s.surrogate.lambda));
  s.burn_in = c.sampler.burn_in.value_or(default_burn_in(c.sampler.n_steps));
  return s;
}

inline nlohmann::json derived_json(const ExperimentConfig& c, const PosteriorSetup& s) {
  return {{"D", c.D()},
          {"delta_N", s.prior.delta},
          {"prior_alpha", c.prior_alpha()},
          {"r", s.surrogate.r},
          {"lambda", s.surrogate.lambda},
          {"lambda_min", s.lambda_min_value},
          {"c1", s.c1},
          {"gamma", s.gamma},
          {"burn_in", s.burn_in},
          {"expected_hessian_min_eigenvalue", s.hessian_min_eigenvalue}};
}

struct RecoveryResult {
  nlohmann::json report;
  ChainRun run;
  Eigen::VectorXd mean;
  PotentialVec W0K;
  double error = 0.0;           ///< ||mean - W_{0,K}||
  double baseline_error = 0.0;  ///< ||W_{0,K}||, the error of the prior mean
  bool non_identifiable = false;
  double seconds = 0.0;
};

inline RecoveryResult run_recovery(const ExperimentConfig& c, const std::filesystem::path* out = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const PosteriorSetup s = prepare_posterior(c);
  const Target target = c.sampler.target == "prior" ? gaussian_target(s.prior.precision())
                                                    : surrogate_posterior_target(s.base, s.data, s.prior, s.surrogate);
  RecoveryResult r;
  r.run = run_ula(s.surrogate.W_init, s.gamma, c.sampler.n_steps, s.burn_in, c.sampler.thin, c.seed, target);
  r.mean = sample_mean(r.run);
  r.W0K = s.W0K;
  r.error = (r.mean - s.W0K.values).norm();
  r.baseline_error = s.W0K.values.norm();
  r.non_identifiable = s.non_identifiable;

  SampleSet first, second;
  const std::size_t half = r.run.samples.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    first.push_back(r.run.samples[i].values);
    second.push_back(r.run.samples[half + i].values);
  }
  nlohmann::json rep = {{"command", "recover"},
                        {"mode", to_string(c.mode())},
                        {"config_hash", config_hash(c)},
                        {"derived", derived_json(c, s)},
                        {"constants", s.constants},
                        {"warnings", s.warnings},
                        {"non_identifiable", s.non_identifiable},
                        {"W0K", to_vector(s.W0K.values)},
                        {"posterior_mean", to_vector(r.mean)},
                        {"error_l2", r.error},
                        {"prior_mean_error_l2", r.baseline_error},
                        {"kept", r.run.kept},
                        {"autocorrelation_time", to_vector(r.run.diagnostics.act)},
                        {"energy_bounded", energy_bounded(r.run.diagnostics.energy)}};
  if (half > 0) rep["w2_squared_between_halves"] = w2_diagnostics(first, second);
  r.report = rep;
  r.seconds = detail::seconds_since(t0);
  if (out) {
    write_dataset(*out / "data", s.data);
    write_chain(*out / "chain", r.run);
    detail::finalize(*out, c, "recover", r.report, r.seconds);
  }
  return r;
}

inline CommandResult cmd_recover(const ExperimentConfig& c, const std::filesystem::path& out) {
  CommandResult res;
  res.report = run_recovery(c, &out).report;
  for (const auto& w : res.report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  return res;
}

inline CommandResult cmd_sample(const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  CommandResult res;
  ChainRun run;
  if (c.sampler.target == "prior") {
    const PriorSpec prior = PriorSpec::make(c.prior_alpha(), c.problem.K, c.problem.d, c.inference.N);
    const double gamma = c.sampler.gamma.value_or(default_step_size(prior, 0.0));
    run = run_ula(PotentialVec(c.problem.K, c.problem.d), gamma, c.sampler.n_steps,
                  c.sampler.burn_in.value_or(default_burn_in(c.sampler.n_steps)), c.sampler.thin, c.seed,
                  gaussian_target(prior.precision()));
    res.report["derived"] = {{"D", c.D()}, {"delta_N", prior.delta}, {"gamma", gamma}};
  } else {
    const PosteriorSetup s = prepare_posterior(c);
    run = run_ula(s.surrogate.W_init, s.gamma, c.sampler.n_steps, s.burn_in, c.sampler.thin, c.seed,
                  surrogate_posterior_target(s.base, s.data, s.prior, s.surrogate));
    res.report["derived"] = derived_json(c, s);
    res.report["warnings"] = s.warnings;
    write_dataset(out / "data", s.data);
  }
  write_chain(out / "chain", run);
  res.report["command"] = "sample";
  res.report["config_hash"] = config_hash(c);
  res.report["kept"] = run.kept;
  res.report["mean"] = to_vector(sample_mean(run));
  res.report["autocorrelation_time"] = to_vector(run.diagnostics.act);
  res.report["energy_bounded"] = energy_bounded(run.diagnostics.energy);
  detail::finalize(out, c, "sample", res.report, detail::seconds_since(t0));
  return res;
}

}  // namespace mckv
