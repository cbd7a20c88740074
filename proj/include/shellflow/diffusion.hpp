#pragma once

#include <string>
#include <vector>

#include "shellflow/spectral.hpp"

namespace shellflow {

/// Bounded smooth scalar profile with recorded sup-norms of itself and its
/// first two derivatives.
enum class ShapeProfile { one, tanh_profile, sin_profile };

ShapeProfile profile_from_name(const std::string& name);
std::string profile_name(ShapeProfile p);
double profile_eval(ShapeProfile p, double x);
double profile_deriv(ShapeProfile p, double x);
double profile_sup(ShapeProfile p);          // ||phi||_inf
double profile_deriv_sup(ShapeProfile p);    // ||phi'||_inf
double profile_deriv2_sup(ShapeProfile p);   // ||phi''||_inf

/// State-dependent Hilbert-Schmidt diffusion built from the coefficient
/// family g^n_m(u) = rho_nm * phi( Re<u, h_nm>_{V_{-delta}} ) with
/// rho_nm = sigma * decay^{(n+m)/2} and h_nm the V_{-delta}-normalized
/// basis vector e_{min(n,m)}. phi takes the real pairing (the real
/// Hilbert-space inner product); a complex argument would make tanh
/// unbounded. rows = shells, cols = noise components.
class DiffusionSpec {
 public:
  DiffusionSpec(LadderPtr ladder, int noise_dim, ShapeProfile profile,
                double sigma, double decay, double delta);

  int rows() const { return ladder_->n_shells(); }
  int cols() const { return noise_dim_; }
  double delta() const { return delta_; }
  double sigma() const { return sigma_; }
  double decay() const { return decay_; }
  ShapeProfile profile() const { return profile_; }
  const LadderPtr& ladder_ptr() const { return ladder_; }

  double rho(int n, int m) const;  // 1-based indices
  /// g^n_m(u); the phi argument is Re(u_j) k_j^{-2 delta} with j = min(n,m).
  double g(const SpectralState& u, int n, int m) const;

  /// sqrt(sum rho^2): the profile-independent part of the constants.
  double rho_frobenius() const;

  // Analytic bounds from Assumption (G): c_G = ||phi||_inf sqrt(sum rho^2),
  // c_DG, c_D2G likewise with the derivative sup-norms.
  double c_g() const;
  double c_dg() const;
  double c_d2g() const;

 private:
  LadderPtr ladder_;
  int noise_dim_;
  ShapeProfile profile_;
  double sigma_;
  double decay_;
  double delta_;
  std::vector<double> rho_;  // rows x cols
};

/// (G(u) v)_n = sum_m g^n_m(u) v_m for a real noise vector v.
SpectralState apply_G(const SpectralState& u, std::span<const double> v,
                      const DiffusionSpec& spec);

/// Adjoint in V: (G(u) v, w)_V = (v, G*(u) w) for real v; returns the real
/// vector G*(u) w with components Re since g is real-valued.
std::vector<double> apply_G_adjoint(const SpectralState& u,
                                    const SpectralState& w,
                                    const DiffusionSpec& spec);

/// Hilbert-Schmidt norm of G(u) (finite truncation, exact sum).
double hs_norm(const SpectralState& u, const DiffusionSpec& spec);

struct DiffusionConstants {
  double c_g_analytic, c_dg_analytic, c_d2g_analytic;
  double c_g_empirical, c_dg_empirical, c_d2g_empirical;
};

/// Analytic bounds plus empirical maxima over `samples` random states
/// (Monte Carlo over u, plus random direction pairs for the derivative
/// quotients). Empirical values never exceed the analytic ones.
DiffusionConstants estimate_constants(const DiffusionSpec& spec, int samples,
                                      std::uint64_t seed = 0);

}  // namespace shellflow
