#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace shellflow {

using cplx = std::complex<double>;

/// Geometric wavenumber ladder k_n = k0 * lambda^n, n = 1..N (shell indices
/// are 1-based; k(0) exists because the nonlinearity references k_{n-1} at
/// n = 1).
class WavenumberLadder {
 public:
  WavenumberLadder(double k0, double lambda, int n_shells);

  double k0() const { return k0_; }
  double lambda() const { return lambda_; }
  int n_shells() const { return n_shells_; }

  /// k_n for any n >= 0; cached up to n_shells + 2.
  double k(int n) const;

  bool same_as(const WavenumberLadder& other) const;

 private:
  double k0_;
  double lambda_;
  int n_shells_;
  std::vector<double> cache_;  // k_0 .. k_{N+2}
};

using LadderPtr = std::shared_ptr<const WavenumberLadder>;

LadderPtr make_ladder(double k0, double lambda, int n_shells);

/// Sobolev index of the weighted space V_alpha (may be negative).
using SobolevIndex = double;

/// Finite truncation of a complex shell sequence u_1..u_N living on a
/// ladder. Shells outside [1, N] read as zero (the u_{-1} = u_0 = 0 and
/// u_{N+1} = u_{N+2} = 0 padding convention). Immutable by convention:
/// all operations return fresh states.
class SpectralState {
 public:
  explicit SpectralState(LadderPtr ladder);  // zero state
  SpectralState(LadderPtr ladder, std::vector<cplx> coeffs);

  /// Unit vector e_n (1-based shell index).
  static SpectralState unit(LadderPtr ladder, int n);

  int n_shells() const { return static_cast<int>(coeffs_.size()); }
  const WavenumberLadder& ladder() const { return *ladder_; }
  const LadderPtr& ladder_ptr() const { return ladder_; }

  /// Shell amplitude u_n, 1-based; zero outside [1, N].
  cplx at(int n) const {
    return (n >= 1 && n <= n_shells()) ? coeffs_[n - 1] : cplx{0.0, 0.0};
  }
  cplx& mut(int n) { return coeffs_[n - 1]; }

  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }

 private:
  LadderPtr ladder_;
  std::vector<cplx> coeffs_;
};

/// || u ||_{V_alpha} = ( sum_n k_n^{4 alpha} |u_n|^2 )^{1/2}.
double weighted_norm(const SpectralState& u, SobolevIndex alpha);

/// (u, v)_{V_alpha} = sum_n k_n^{4 alpha} u_n conj(v_n). Throws
/// std::invalid_argument on ladder mismatch.
cplx weighted_inner(const SpectralState& u, const SpectralState& v,
                    SobolevIndex alpha);

/// Lambda^gamma u with Lambda = -A the positive diagonal (k_n^2); component
/// n is k_n^{2 gamma} u_n. gamma = 1 recovers -A u (nu = 1).
SpectralState apply_lambda_power(const SpectralState& u, SobolevIndex gamma);

/// Analytic semigroup S(t) = e^{tA}: component n is e^{-k_n^2 t} u_n.
/// Throws std::invalid_argument for t < 0.
SpectralState semigroup_apply(double t, const SpectralState& u);

// Plain vector arithmetic used by the time stepper and audits.
SpectralState add(const SpectralState& u, const SpectralState& v);
SpectralState sub(const SpectralState& u, const SpectralState& v);
SpectralState scale(cplx c, const SpectralState& u);

}  // namespace shellflow
