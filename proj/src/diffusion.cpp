#include "shellflow/diffusion.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace shellflow {

ShapeProfile profile_from_name(const std::string& name) {
  if (name == "one" || name == "const") return ShapeProfile::one;
  if (name == "tanh") return ShapeProfile::tanh_profile;
  if (name == "sin") return ShapeProfile::sin_profile;
  throw std::invalid_argument("diffusion.profile: unknown profile '" + name + "'");
}

std::string profile_name(ShapeProfile p) {
  switch (p) {
    case ShapeProfile::one: return "one";
    case ShapeProfile::tanh_profile: return "tanh";
    case ShapeProfile::sin_profile: return "sin";
  }
  return "?";
}

double profile_eval(ShapeProfile p, double x) {
  switch (p) {
    case ShapeProfile::one: return 1.0;
    case ShapeProfile::tanh_profile: return std::tanh(x);
    case ShapeProfile::sin_profile: return std::sin(x);
  }
  return 0.0;
}

double profile_deriv(ShapeProfile p, double x) {
  switch (p) {
    case ShapeProfile::one: return 0.0;
    case ShapeProfile::tanh_profile: {
      const double c = std::cosh(x);
      return 1.0 / (c * c);
    }
    case ShapeProfile::sin_profile: return std::cos(x);
  }
  return 0.0;
}

double profile_sup(ShapeProfile p) { return 1.0; }

double profile_deriv_sup(ShapeProfile p) {
  return p == ShapeProfile::one ? 0.0 : 1.0;
}

double profile_deriv2_sup(ShapeProfile p) {
  switch (p) {
    case ShapeProfile::one: return 0.0;
    case ShapeProfile::tanh_profile:
      // max |(-2 tanh) sech^2| = 4/(3 sqrt 3)
      return 4.0 / (3.0 * std::sqrt(3.0));
    case ShapeProfile::sin_profile: return 1.0;
  }
  return 0.0;
}

DiffusionSpec::DiffusionSpec(LadderPtr ladder, int noise_dim,
                             ShapeProfile profile, double sigma, double decay,
                             double delta)
    : ladder_(std::move(ladder)),
      noise_dim_(noise_dim),
      profile_(profile),
      sigma_(sigma),
      decay_(decay),
      delta_(delta) {
  if (noise_dim_ < 1) throw std::invalid_argument("diffusion: noise_dim >= 1");
  if (!(decay_ > 0.0 && decay_ < 1.0))
    throw std::invalid_argument("diffusion: decay must lie in (0, 1)");
  if (!(delta_ > 0.0)) throw std::invalid_argument("diffusion: delta must be > 0");
  const int n = rows();
  rho_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(noise_dim_));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= noise_dim_; ++j)
      rho_[static_cast<std::size_t>((i - 1) * noise_dim_ + (j - 1))] =
          sigma_ * std::pow(decay_, 0.5 * static_cast<double>(i + j));
}

double DiffusionSpec::rho(int n, int m) const {
  return rho_[static_cast<std::size_t>((n - 1) * noise_dim_ + (m - 1))];
}

double DiffusionSpec::g(const SpectralState& u, int n, int m) const {
  const int j = std::min(n, m);
  // <u, h_nm>_{V_{-delta}} with h_nm = e_j / ||e_j||_{V_{-delta}}: the real
  // pairing collapses to Re(u_j) k_j^{-2 delta}.
  const double arg = u.at(j).real() * std::pow(ladder_->k(j), -2.0 * delta_);
  return rho(n, m) * profile_eval(profile_, arg);
}

double DiffusionSpec::rho_frobenius() const {
  double s = 0.0;
  for (double r : rho_) s += r * r;
  return std::sqrt(s);
}

double DiffusionSpec::c_g() const { return profile_sup(profile_) * rho_frobenius(); }
double DiffusionSpec::c_dg() const {
  return profile_deriv_sup(profile_) * rho_frobenius();
}
double DiffusionSpec::c_d2g() const {
  return profile_deriv2_sup(profile_) * rho_frobenius();
}

SpectralState apply_G(const SpectralState& u, std::span<const double> v,
                      const DiffusionSpec& spec) {
  if (!u.ladder().same_as(*spec.ladder_ptr()))
    throw std::invalid_argument("apply_G: state ladder differs from spec ladder");
  if (static_cast<int>(v.size()) != spec.cols())
    throw std::invalid_argument("apply_G: noise dimension mismatch");
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= spec.rows(); ++n) {
    double s = 0.0;
    for (int m = 1; m <= spec.cols(); ++m)
      s += spec.g(u, n, m) * v[static_cast<std::size_t>(m - 1)];
    out.mut(n) = cplx{s, 0.0};
  }
  return out;
}

std::vector<double> apply_G_adjoint(const SpectralState& u,
                                    const SpectralState& w,
                                    const DiffusionSpec& spec) {
  std::vector<double> out(static_cast<std::size_t>(spec.cols()), 0.0);
  for (int m = 1; m <= spec.cols(); ++m) {
    double s = 0.0;
    for (int n = 1; n <= spec.rows(); ++n)
      s += spec.g(u, n, m) * w.at(n).real();
    out[static_cast<std::size_t>(m - 1)] = s;
  }
  return out;
}

double hs_norm(const SpectralState& u, const DiffusionSpec& spec) {
  double s = 0.0;
  for (int n = 1; n <= spec.rows(); ++n)
    for (int m = 1; m <= spec.cols(); ++m) {
      const double gg = spec.g(u, n, m);
      s += gg * gg;
    }
  return std::sqrt(s);
}

namespace {

SpectralState random_state(LadderPtr ladder, std::mt19937_64& eng, double amp) {
  std::normal_distribution<double> N(0.0, amp);
  SpectralState u(ladder);
  for (int n = 1; n <= u.n_shells(); ++n) u.mut(n) = cplx{N(eng), N(eng)};
  return u;
}

double hs_dist(const SpectralState& u1, const SpectralState& u2,
               const DiffusionSpec& spec) {
  double s = 0.0;
  for (int n = 1; n <= spec.rows(); ++n)
    for (int m = 1; m <= spec.cols(); ++m) {
      const double d = spec.g(u1, n, m) - spec.g(u2, n, m);
      s += d * d;
    }
  return std::sqrt(s);
}

}  // namespace

DiffusionConstants estimate_constants(const DiffusionSpec& spec, int samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("estimate_constants: samples >= 1");
  std::mt19937_64 eng(seed);
  DiffusionConstants c{};
  c.c_g_analytic = spec.c_g();
  c.c_dg_analytic = spec.c_dg();
  c.c_d2g_analytic = spec.c_d2g();
  c.c_g_empirical = 0.0;
  c.c_dg_empirical = 0.0;
  c.c_d2g_empirical = 0.0;

  for (int s = 0; s < samples; ++s) {
    const double amp = std::exp(std::uniform_real_distribution<double>(-2.0, 2.0)(eng));
    const SpectralState u1 = random_state(spec.ladder_ptr(), eng, amp);
    const SpectralState u2 = random_state(spec.ladder_ptr(), eng, amp);
    c.c_g_empirical = std::max(c.c_g_empirical, hs_norm(u1, spec));

    // Lipschitz quotient ||G(u1)-G(u2)|| / ||u1-u2||_{V_{-delta}}
    const double dist = weighted_norm(sub(u1, u2), -spec.delta());
    if (dist > 1e-12)
      c.c_dg_empirical = std::max(c.c_dg_empirical, hs_dist(u1, u2, spec) / dist);

    // curvature quotient ||G(u+h) + G(u-h) - 2 G(u)|| / ||h||^2 along a small
    // random direction (second-order accurate probe of D^2 G)
    SpectralState hdir = random_state(spec.ladder_ptr(), eng, 1.0);
    const double hn0 = weighted_norm(hdir, -spec.delta());
    if (hn0 > 1e-12) {
      const double eps = 1e-3;
      hdir = scale(cplx{eps / hn0, 0.0}, hdir);
      const double hn = weighted_norm(hdir, -spec.delta());
      const SpectralState up = add(u1, hdir);
      const SpectralState um = sub(u1, hdir);
      double s2 = 0.0;
      for (int n = 1; n <= spec.rows(); ++n)
        for (int mm = 1; mm <= spec.cols(); ++mm) {
          const double d = spec.g(up, n, mm) + spec.g(um, n, mm) -
                           2.0 * spec.g(u1, n, mm);
          s2 += d * d;
        }
      c.c_d2g_empirical = std::max(c.c_d2g_empirical, std::sqrt(s2) / (hn * hn));
    }
  }
  return c;
}

}  // namespace shellflow
