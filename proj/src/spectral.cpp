#include "shellflow/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace shellflow {

WavenumberLadder::WavenumberLadder(double k0, double lambda, int n_shells)
    : k0_(k0), lambda_(lambda), n_shells_(n_shells) {
  if (!(k0 > 0.0)) throw std::invalid_argument("ladder: k0 must be > 0");
  if (!(lambda > 1.0)) throw std::invalid_argument("ladder: lambda must be > 1");
  if (n_shells < 1) throw std::invalid_argument("ladder: n_shells must be >= 1");
  cache_.resize(static_cast<std::size_t>(n_shells_) + 3);
  for (int n = 0; n <= n_shells_ + 2; ++n)
    cache_[static_cast<std::size_t>(n)] = k0_ * std::pow(lambda_, n);
}

double WavenumberLadder::k(int n) const {
  if (n < 0) throw std::invalid_argument("ladder: negative shell index");
  if (n < static_cast<int>(cache_.size())) return cache_[static_cast<std::size_t>(n)];
  return k0_ * std::pow(lambda_, n);
}

bool WavenumberLadder::same_as(const WavenumberLadder& other) const {
  return k0_ == other.k0_ && lambda_ == other.lambda_ &&
         n_shells_ == other.n_shells_;
}

LadderPtr make_ladder(double k0, double lambda, int n_shells) {
  return std::make_shared<const WavenumberLadder>(k0, lambda, n_shells);
}

SpectralState::SpectralState(LadderPtr ladder)
    : ladder_(std::move(ladder)),
      coeffs_(static_cast<std::size_t>(ladder_->n_shells())) {}

SpectralState::SpectralState(LadderPtr ladder, std::vector<cplx> coeffs)
    : ladder_(std::move(ladder)), coeffs_(std::move(coeffs)) {
  if (static_cast<int>(coeffs_.size()) != ladder_->n_shells())
    throw std::invalid_argument("state: coefficient count != n_shells");
}

SpectralState SpectralState::unit(LadderPtr ladder, int n) {
  SpectralState u(std::move(ladder));
  if (n < 1 || n > u.n_shells())
    throw std::invalid_argument("state: unit index out of range");
  u.coeffs_[static_cast<std::size_t>(n - 1)] = cplx{1.0, 0.0};
  return u;
}

namespace {
void require_same_ladder(const SpectralState& u, const SpectralState& v) {
  if (!u.ladder().same_as(v.ladder()))
    throw std::invalid_argument("states live on different ladders");
}
}  // namespace

double weighted_norm(const SpectralState& u, SobolevIndex alpha) {
  double s = 0.0;
  for (int n = 1; n <= u.n_shells(); ++n) {
    const double w = std::pow(u.ladder().k(n), 4.0 * alpha);
    s += w * std::norm(u.at(n));
  }
  return std::sqrt(s);
}

cplx weighted_inner(const SpectralState& u, const SpectralState& v,
                    SobolevIndex alpha) {
  require_same_ladder(u, v);
  cplx s{0.0, 0.0};
  for (int n = 1; n <= u.n_shells(); ++n) {
    const double w = std::pow(u.ladder().k(n), 4.0 * alpha);
    s += w * u.at(n) * std::conj(v.at(n));
  }
  return s;
}

SpectralState apply_lambda_power(const SpectralState& u, SobolevIndex gamma) {
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= u.n_shells(); ++n)
    out.mut(n) = std::pow(u.ladder().k(n), 2.0 * gamma) * u.at(n);
  return out;
}

SpectralState semigroup_apply(double t, const SpectralState& u) {
  if (t < 0.0) throw std::invalid_argument("semigroup: t must be >= 0");
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= u.n_shells(); ++n) {
    const double k = u.ladder().k(n);
    out.mut(n) = std::exp(-k * k * t) * u.at(n);
  }
  return out;
}

SpectralState add(const SpectralState& u, const SpectralState& v) {
  require_same_ladder(u, v);
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= u.n_shells(); ++n) out.mut(n) = u.at(n) + v.at(n);
  return out;
}

SpectralState sub(const SpectralState& u, const SpectralState& v) {
  require_same_ladder(u, v);
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= u.n_shells(); ++n) out.mut(n) = u.at(n) - v.at(n);
  return out;
}

SpectralState scale(cplx c, const SpectralState& u) {
  SpectralState out(u.ladder_ptr());
  for (int n = 1; n <= u.n_shells(); ++n) out.mut(n) = c * u.at(n);
  return out;
}

}  // namespace shellflow
