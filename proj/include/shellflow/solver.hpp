#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shellflow/diffusion.hpp"
#include "shellflow/frac.hpp"
#include "shellflow/noise.hpp"
#include "shellflow/nonlinearity.hpp"
#include "shellflow/spectral.hpp"

namespace shellflow {

enum class Scheme { exponential_euler, imex };
Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme s);

/// Time-stepping and audit parameters. The Hoelder bookkeeping must satisfy
/// 1/2 < beta_hat < beta_prime (< H), delta in (beta_hat, 1) and
/// 1 - beta_prime < alpha < beta_hat; alpha <= 0 requests the midpoint
/// default.
struct SolverConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  double delta = 0.75;
  double beta_hat = 0.55;
  double beta_prime = 0.7;
  double alpha = 0.0;
  Scheme scheme = Scheme::exponential_euler;
  double blowup_factor = 1e6;

  double effective_alpha() const;
  void validate() const;
};

/// Raised when the blow-up guard ||u(t)|| > blowup_factor * max(1, ||u0||)
/// trips; the equation has global solutions, so this indicates a numerical
/// fault (or an unstable configuration), never normal behavior.
struct BlowUpError : std::runtime_error {
  BlowUpError(double when, double norm);
  double time;
  double norm;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralState> states;
  std::shared_ptr<const HilbertPath> noise;
  SolverConfig config;

  std::size_t steps() const { return times.size() - 1; }
  double dt() const { return times[1] - times[0]; }
};

/// Advance du = (Au + B(u,u)) dt + G(u) omega' dt under piecewise-linear
/// noise. exponential_euler propagates the diagonal linear part exactly and
/// filters the forcing through phi1; imex treats the linear part implicitly.
/// dt must divide the noise segment length.
Trajectory integrate_galerkin(const SpectralState& u0, const HilbertPath& omega,
                              const SolverConfig& cfg, const DiffusionSpec& spec,
                              const ShellCoefficients& coeffs);

/// Max over checkpoint times of the V-norm defect of the variation-of-
/// constants form: u(t) - S(t)u0 - int S(t-r) B(u,u) dr - int S(t-r) G(u) domega.
/// The deterministic integral uses exact exponential cell moments; the
/// stochastic term goes through semigroup_convolution. Checkpoints are
/// n_checkpoints equispaced grid times (the grid-wide max would cost
/// O(N M m^3)).
double mild_residual(const Trajectory& traj, const DiffusionSpec& spec,
                     const ShellCoefficients& coeffs, int n_checkpoints = 8);

/// Two sides of an inequality sampled along a trajectory. pass iff
/// min(rhs - lhs) >= -tolerance.
struct AuditReport {
  std::string name;
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double tolerance = 0.0;
  bool pass = false;
  std::map<std::string, double> fitted;

  double min_slack() const;
  void finalize();  // recompute pass from the arrays
};

/// Energy balance: ||u(t)||^2 + 2 int_0^t ||u||^2_{V_1/2} dr against
/// ||u0||^2 + 2 |int_0^t (G(u) omega', u)_V dr| (trapezoid in time). Also
/// evaluates the fractional-derivative majorant of the pairing term
/// (er-constant and Beta moments, |||omega|||_{beta'} and the trajectory
/// seminorms) and records it under fitted["majorant_..."].
AuditReport energy_audit(const Trajectory& traj, const DiffusionSpec& spec,
                         double tolerance_scale = 1e-6, int n_checkpoints = 16);

/// Hoelder-seminorm growth: |||u|||_{beta_hat, -delta, 0, t} against the
/// bound assembled from ||u0||, ||u||_C and |||omega|||_{beta'}. Reports the
/// minimal single constant that makes the inequality hold at every
/// checkpoint and passes iff it stays below fixture_constant.
AuditReport holder_audit(const Trajectory& traj, double fixture_constant,
                         int n_checkpoints = 16);

/// Weak-form defect against test functions e_1..e_{n_test}: max over grid
/// times of the Def-style pairing residual (trapezoid integrals).
double weak_form_defect(const Trajectory& traj, const DiffusionSpec& spec,
                        const ShellCoefficients& coeffs, int n_test = 4);

/// Grid proxy of |||u|||_{beta, mu, 0, t_k} for every checkpoint index in
/// `at`; one cumulative pair scan (dyadic-lag subsampling beyond 4096 steps).
std::vector<double> trajectory_holder_seminorms(const Trajectory& traj,
                                                double beta, double mu,
                                                std::span<const std::size_t> at);

/// Sup-norm distance max_t ||a(t) - b(t)||_{V_mu} over the common grid
/// (trajectories may differ in step size by an integer stride).
double trajectory_sup_distance(const Trajectory& a, const Trajectory& b,
                               double mu);

struct Envelope {
  std::vector<double> times;
  std::vector<double> y1;
  std::vector<double> y2;  // +inf where a(t) = 0
};

/// Roots Y_{1,2}(t) = (1 -/+ sqrt(1-4ab)) / (2a) of Y = b + a Y^2, evaluated
/// through the cancellation-free form Y1 = 2b/(1 + sqrt(1-4ab)) (a -> 0
/// gives Y1 -> b). Throws std::domain_error naming the first time where
/// 4 a b >= 1.
Envelope apriori_envelope(const std::function<double(double)>& a_fn,
                          const std::function<double(double)>& b_fn, double t1,
                          int n_points = 257);

struct IntervalConstants {
  double k_hat = 2.0;  // first interval has length 1/k_hat
  double k = 2.0;      // interval i >= 2 has length 1/(k i)
  double c = 1.0;      // sup-norm envelope constant
  double c_bar = 1.0;  // the constant multiplying ||u0|| in the admissibility bound
  double u0_norm = 0.0;
};

struct IntervalBound {
  double t_lo, t_hi;
  double holder_bound;  // (K i)^{beta_hat}
  double sup_bound;     // 3 c (K i)^{1-beta'} / (1-beta')
};

/// The finite interval partition of [0, 1] with per-interval Hoelder and
/// sup-norm envelopes; a diagnostic overlay, not a solver control.
/// Requires x0 >= max(1, c_bar ||u0||, ||u0||) and k >= k_hat > 1.
std::vector<IntervalBound> interval_scheme(double x0, const IntervalConstants& c,
                                           double beta_hat, double beta_prime);

struct RefinementRow {
  int level;
  double diff_minus_delta;  // sup_t || u_l - u_grid ||_{V_{-delta}}
  double diff_v;            // same in V
  double diff_seminorm;     // ||| u_l - u_grid |||_{beta_hat, -delta}
  double noise_dist;        // ||| omega_l - omega_grid |||_{beta'}
  double fitted_c;          // diff_seminorm / noise_dist
};

/// Solve under piecewise-linear restrictions of one sampled fBm path at
/// increasing dyadic levels, plus the full-grid restriction as the limit
/// stand-in, and report per-level distances to it. The fitted constant
/// pairs the Hoelder seminorm of the solution difference with the noise
/// seminorm distance (the topology of the continuity argument); sup-norm
/// distances track the refinement directly.
std::vector<RefinementRow> noise_refinement_study(
    const SpectralState& u0, const HilbertPath& omega,
    std::span<const int> levels, const SolverConfig& cfg,
    const DiffusionSpec& spec, const ShellCoefficients& coeffs);

struct UniquenessProbe {
  double div_dt;    // max_t ||u_expeuler - u_imex||_V at dt
  double div_dt2;   // at dt/2
  double div_dt4;   // at dt/4
};

/// Two schemes on the same path and initial condition; the divergence must
/// vanish as dt -> 0 if the limit is unique.
UniquenessProbe uniqueness_probe(const SpectralState& u0, const HilbertPath& omega,
                                 const SolverConfig& cfg, const DiffusionSpec& spec,
                                 const ShellCoefficients& coeffs);

struct GalerkinRow {
  int n_shells;
  double diff_sup;  // sup_t || u^{(N)} - u^{(2N)} ||_V (zero-padded embedding)
};

std::vector<GalerkinRow> galerkin_study(std::span<const int> n_list, double k0,
                                        double lambda,
                                        const std::vector<cplx>& u0_profile,
                                        const HilbertPath& omega,
                                        const SolverConfig& cfg,
                                        ShapeProfile profile, double sigma,
                                        double decay,
                                        const ShellCoefficients& coeffs);

}  // namespace shellflow
