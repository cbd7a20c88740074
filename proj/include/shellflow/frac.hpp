#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "shellflow/noise.hpp"
#include "shellflow/spectral.hpp"

namespace shellflow {

/// Order of the left fractional derivative (the right one has order
/// 1 - alpha). Must lie in (0, 1); against a beta'-Hoelder integrator and a
/// beta-Hoelder integrand the admissible window is 1 - beta' < alpha < beta.
struct FracOrder {
  double alpha;
  explicit FracOrder(double a);
};

/// Midpoint of the admissible window (1 - beta', beta_hat).
double default_alpha(double beta_prime, double beta_hat);

/// Hoelder regularity hints for the integrand (beta) and the integrator
/// (beta_prime); 1.0 means Lipschitz. Used to validate the window and to
/// pick the endpoint weight exponents of the outer quadrature.
struct RegularityWindow {
  double beta = 1.0;
  double beta_prime = 1.0;
};

/// Scalar sample path on the uniform grid t_j = t0 + j (t1-t0)/m.
struct GridFn {
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> v;

  std::size_t cells() const { return v.size() - 1; }
  double dt() const { return (t1 - t0) / static_cast<double>(cells()); }
  double time(std::size_t j) const { return t0 + dt() * static_cast<double>(j); }
};

/// D^alpha_{t0+} f at grid index j (r = t0 + j dt, j >= 1): boundary term
/// plus the singular difference integral, product-trapezoid with exact
/// power-weight moments per cell; the cell touching q = r models the
/// difference as |r - q|^{holder_damp} (1.0 = linear interpolation).
double frac_deriv_left(const GridFn& f, FracOrder alpha, std::size_t j,
                       double holder_damp = 1.0);

/// D^{1-alpha}_{t1-} (f - f(t1)) at grid index j (j <= m; the value at
/// j = m is 0), real convention with the (-1)^{1-alpha} phase dropped.
double frac_deriv_right(const GridFn& f, FracOrder alpha, std::size_t j,
                        double holder_damp = 1.0);

/// Componentwise right derivative of a vector path restricted to
/// [0, t_{j2}]; returns the vector at grid index j.
std::vector<double> frac_deriv_right(const HilbertPath& omega, FracOrder alpha,
                                     std::size_t j, std::size_t j2,
                                     double holder_damp = 1.0);

// Full tables (index 0..m). OpenMP-parallel over the evaluation index with
// serial references kept for testing; entries are computed independently so
// both agree bitwise. The left table defines index 0 by its continuum limit,
// which exists only when f(t0) = 0 (throws otherwise).
std::vector<double> frac_deriv_left_table(const GridFn& f, FracOrder alpha,
                                          double holder_damp = 1.0);
std::vector<double> frac_deriv_left_table_serial(const GridFn& f, FracOrder alpha,
                                                 double holder_damp = 1.0);
std::vector<double> frac_deriv_right_table(const GridFn& f, FracOrder alpha,
                                           double holder_damp = 1.0);
std::vector<double> frac_deriv_right_table_serial(const GridFn& f, FracOrder alpha,
                                                  double holder_damp = 1.0);

/// Gamma-factor constant of the right-derivative envelope
/// |D^{1-alpha}_{t-} omega_{t-}[r]| <= c |||omega|||_{beta'} (t-r)^{alpha+beta'-1}:
/// c = (1/Gamma(alpha)) (1 + (1-alpha)/(alpha+beta'-1)).
double er_constant(double alpha, double beta_prime);

/// Constant of the Young-integral bound
/// ||int Z domega|| <= c ||Z||_{C^beta} |||omega|||_{beta'} (t1-t0)^{beta'},
/// assembled from er_constant and two Beta-function moments.
double l3_constant(double alpha, double beta, double beta_prime, double length);

/// Exact-weight product quadrature of int_s^t G(r) (r-s)^a (t-r)^b dr with
/// G sampled on the uniform grid (linear per cell, incomplete-beta cell
/// moments). Reproduces the Beta identity exactly for constant G. Requires
/// a, b > -1.
double weighted_singular_integral(std::span<const double> g, double s, double t,
                                  double a, double b);

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;  // |value_h - value_2h|, NaN if m is odd
};

/// Young integral int z dzeta via the fractional-derivative composite, the
/// complex phases folded into the sign so that int 1 dzeta = zeta(t1) -
/// zeta(t0) holds exactly (the constant part of z is split off and
/// integrated in closed form). Both paths must share the grid.
IntegralResult young_integral_scalar(const GridFn& z, const GridFn& zeta,
                                     FracOrder alpha,
                                     RegularityWindow window = {});

/// Operator-valued path on the uniform grid over [0, horizon]; values are
/// rows x cols complex matrices (Hilbert-Schmidt representatives),
/// row-major per time step.
struct OperatorPath {
  double horizon = 1.0;
  std::size_t m = 0;  // grid cells
  int rows = 0;
  int cols = 0;
  std::vector<cplx> values;  // (m+1) * rows * cols

  cplx at(std::size_t j, int r, int c) const {
    return values[(j * static_cast<std::size_t>(rows) + static_cast<std::size_t>(r)) *
                      static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(c)];
  }
  cplx& at(std::size_t j, int r, int c) {
    return values[(j * static_cast<std::size_t>(rows) + static_cast<std::size_t>(r)) *
                      static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(c)];
  }
  double dt() const { return horizon / static_cast<double>(m); }

  /// sup_r ||Z(r)||_HS on the grid.
  double sup_hs_norm() const;
  /// Grid Hoelder seminorm of r -> Z(r) in the HS norm.
  double holder_seminorm_hs(double beta) const;
};

struct VectorIntegralResult {
  std::vector<cplx> value;
  double error_estimate = 0.0;
  double l3_bound = 0.0;  // rigorous bound alongside the value
};

/// int_0^T Z domega, component j = sum_i int z_ji dzeta_i (scalar Young
/// integrals, OpenMP-parallel over output rows). omega and Z share the grid.
VectorIntegralResult young_integral_operator(const OperatorPath& Z,
                                             const HilbertPath& omega,
                                             FracOrder alpha,
                                             RegularityWindow window = {});

/// int_0^t S(t-r) G(r) domega(r): the operator Young integral with the
/// damped kernel e^{-k_n^2 (t-r)} folded into the integrand. G is sampled
/// on the grid of omega, both over [0, t].
VectorIntegralResult semigroup_convolution(double t, const OperatorPath& G_of_u,
                                           const HilbertPath& omega,
                                           FracOrder alpha,
                                           const WavenumberLadder& ladder,
                                           RegularityWindow window = {});

}  // namespace shellflow
