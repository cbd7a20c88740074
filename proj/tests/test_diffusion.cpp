#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shellflow/diffusion.hpp"

using namespace shellflow;

namespace {

SpectralState random_state(const LadderPtr& lad, std::mt19937_64& eng,
                           double amp = 1.0) {
  std::normal_distribution<double> N(0.0, amp);
  SpectralState u(lad);
  for (int n = 1; n <= u.n_shells(); ++n) u.mut(n) = cplx{N(eng), N(eng)};
  return u;
}

}  // namespace

TEST_CASE("additive degenerate case: phi == 1") {
  auto lad = make_ladder(1.0, 2.0, 8);
  DiffusionSpec spec(lad, 8, ShapeProfile::one, 0.3, 0.5, 0.75);
  std::mt19937_64 eng(41);
  const auto u1 = random_state(lad, eng);
  const auto u2 = random_state(lad, eng, 10.0);
  std::vector<double> v(8);
  for (auto& x : v) x = std::normal_distribution<double>()(eng);
  const auto g1 = apply_G(u1, v, spec);
  const auto g2 = apply_G(u2, v, spec);
  for (int n = 1; n <= 8; ++n) {
    CHECK(g1.at(n) == g2.at(n));  // independent of the state
    double want = 0.0;
    for (int m = 1; m <= 8; ++m)
      want += spec.rho(n, m) * v[static_cast<std::size_t>(m - 1)];
    CHECK(g1.at(n).real() == doctest::Approx(want).epsilon(1e-14));
    CHECK(g1.at(n).imag() == 0.0);
  }
  const auto est = estimate_constants(spec, 100, 1);
  CHECK(est.c_dg_analytic == 0.0);
  CHECK(est.c_dg_empirical == 0.0);
}

TEST_CASE("unit vectors pick out columns") {
  auto lad = make_ladder(1.0, 2.0, 6);
  DiffusionSpec spec(lad, 6, ShapeProfile::tanh_profile, 0.5, 0.5, 0.75);
  std::mt19937_64 eng(42);
  const auto u = random_state(lad, eng);
  for (int m = 1; m <= 6; ++m) {
    std::vector<double> em(6, 0.0);
    em[static_cast<std::size_t>(m - 1)] = 1.0;
    const auto col = apply_G(u, em, spec);
    for (int n = 1; n <= 6; ++n)
      CHECK(col.at(n).real() == doctest::Approx(spec.g(u, n, m)).epsilon(1e-15));
  }
  std::vector<double> bad(5, 0.0);
  CHECK_THROWS_AS(apply_G(u, bad, spec), std::invalid_argument);
}

TEST_CASE("analytic bounds dominate empirical maxima") {
  auto lad = make_ladder(1.0, 2.0, 8);
  DiffusionSpec spec(lad, 8, ShapeProfile::tanh_profile, 0.7, 0.5, 0.75);
  // c_G = ||phi||_inf sqrt(sum rho^2)
  double s2 = 0.0;
  for (int n = 1; n <= 8; ++n)
    for (int m = 1; m <= 8; ++m) s2 += spec.rho(n, m) * spec.rho(n, m);
  CHECK(spec.c_g() == doctest::Approx(std::sqrt(s2)).epsilon(1e-14));
  CHECK(spec.c_dg() == doctest::Approx(std::sqrt(s2)).epsilon(1e-14));
  CHECK(spec.c_d2g() ==
        doctest::Approx(4.0 / (3.0 * std::sqrt(3.0)) * std::sqrt(s2)).epsilon(1e-14));

  const auto est = estimate_constants(spec, 1000, 3);
  CHECK(est.c_g_empirical <= est.c_g_analytic);
  CHECK(est.c_dg_empirical <= est.c_dg_analytic);
  CHECK(est.c_d2g_empirical <= est.c_d2g_analytic);
  CHECK(est.c_g_empirical > 0.0);

  // HS norm bounded by c_G on random states
  std::mt19937_64 eng(43);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto u = random_state(lad, eng, std::exp(ldexp(rep % 7, -1)));
    CHECK(hs_norm(u, spec) <= spec.c_g() * (1.0 + 1e-13));
  }
}

TEST_CASE("Lipschitz bound with the analytic c_DG") {
  auto lad = make_ladder(1.0, 2.0, 8);
  DiffusionSpec spec(lad, 8, ShapeProfile::tanh_profile, 0.4, 0.5, 0.75);
  std::mt19937_64 eng(44);
  for (int rep = 0; rep < 500; ++rep) {
    const auto u1 = random_state(lad, eng);
    const auto u2 = random_state(lad, eng);
    double d2 = 0.0;
    for (int n = 1; n <= 8; ++n)
      for (int m = 1; m <= 8; ++m) {
        const double d = spec.g(u1, n, m) - spec.g(u2, n, m);
        d2 += d * d;
      }
    const double dist = weighted_norm(sub(u1, u2), -0.75);
    CHECK(std::sqrt(d2) <= spec.c_dg() * dist * (1.0 + 1e-12));
  }
}

TEST_CASE("four-point second-order difference bound") {
  auto lad = make_ladder(1.0, 2.0, 8);
  DiffusionSpec spec(lad, 8, ShapeProfile::tanh_profile, 0.6, 0.5, 0.75);
  std::mt19937_64 eng(45);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto u1 = random_state(lad, eng);
    const auto v1 = random_state(lad, eng);
    const auto u2 = random_state(lad, eng);
    const auto v2 = random_state(lad, eng);
    double lhs2 = 0.0;
    for (int n = 1; n <= 8; ++n)
      for (int m = 1; m <= 8; ++m) {
        const double d = (spec.g(u1, n, m) - spec.g(v1, n, m)) -
                         (spec.g(u2, n, m) - spec.g(v2, n, m));
        lhs2 += d * d;
      }
    const double nd = -0.75;
    const double rhs =
        spec.c_dg() * weighted_norm(sub(sub(u1, v1), sub(u2, v2)), nd) +
        spec.c_d2g() * weighted_norm(sub(u1, u2), nd) *
            (weighted_norm(sub(u1, v1), nd) + weighted_norm(sub(u2, v2), nd));
    CHECK(std::sqrt(lhs2) <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("Frechet derivative: central differences converge at second order") {
  auto lad = make_ladder(1.0, 2.0, 6);
  DiffusionSpec spec(lad, 6, ShapeProfile::tanh_profile, 0.8, 0.5, 0.75);
  std::mt19937_64 eng(46);
  const auto u = random_state(lad, eng);
  const auto dir = random_state(lad, eng);
  std::vector<double> v(6);
  for (auto& x : v) x = std::normal_distribution<double>()(eng);

  // analytic derivative of u -> G(u)v along dir:
  // sum_m rho_nm phi'(<u,h>) <dir, h_nm> v_m with <.,h> the real pairing
  auto analytic = [&](int n) {
    double acc = 0.0;
    for (int m = 1; m <= 6; ++m) {
      const int jmin = std::min(n, m);
      const double kd = std::pow(lad->k(jmin), -2.0 * 0.75);
      const double arg = u.at(jmin).real() * kd;
      const double ddir = dir.at(jmin).real() * kd;
      acc += spec.rho(n, m) * profile_deriv(ShapeProfile::tanh_profile, arg) *
             ddir * v[static_cast<std::size_t>(m - 1)];
    }
    return acc;
  };

  double prev_err = 1e300;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    double err = 0.0;
    const auto up = add(u, scale(cplx{h, 0.0}, dir));
    const auto um = sub(u, scale(cplx{h, 0.0}, dir));
    const auto gp = apply_G(up, v, spec);
    const auto gm = apply_G(um, v, spec);
    for (int n = 1; n <= 6; ++n) {
      const double fd = (gp.at(n).real() - gm.at(n).real()) / (2.0 * h);
      err = std::max(err, std::abs(fd - analytic(n)));
    }
    if (prev_err < 1e200) CHECK(err <= prev_err / 3.0);  // order ~2 => factor 4
    prev_err = err;
  }
}

TEST_CASE("derivative summability equals the Parseval value") {
  // sum_{n,m,k} |D g^n_m(u) f_k|^2 = sum_{n,m} rho_nm^2 phi'(arg_nm)^2 over a
  // real orthonormal basis of V_{-delta}; computed exactly for the family.
  auto lad = make_ladder(1.0, 2.0, 6);
  const double delta = 0.75;
  DiffusionSpec spec(lad, 6, ShapeProfile::tanh_profile, 0.5, 0.5, delta);
  std::mt19937_64 eng(47);
  const auto u = random_state(lad, eng);

  double direct = 0.0;
  // basis f_k = k_j^{2 delta} e_j and i k_j^{2 delta} e_j; only the real
  // component along h_nm survives the real pairing
  for (int n = 1; n <= 6; ++n)
    for (int m = 1; m <= 6; ++m) {
      const int jmin = std::min(n, m);
      const double arg = u.at(jmin).real() * std::pow(lad->k(jmin), -2.0 * delta);
      const double dphi = profile_deriv(ShapeProfile::tanh_profile, arg);
      for (int j = 1; j <= 6; ++j) {
        // <f_j, h_nm> = delta_{j, jmin} for the real member, 0 for the i one
        const double inner_re = (j == jmin) ? 1.0 : 0.0;
        direct += std::pow(spec.rho(n, m) * dphi * inner_re, 2.0);
      }
    }
  double parseval = 0.0;
  for (int n = 1; n <= 6; ++n)
    for (int m = 1; m <= 6; ++m) {
      const int jmin = std::min(n, m);
      const double arg = u.at(jmin).real() * std::pow(lad->k(jmin), -2.0 * delta);
      parseval += std::pow(
          spec.rho(n, m) * profile_deriv(ShapeProfile::tanh_profile, arg), 2.0);
    }
  CHECK(direct == doctest::Approx(parseval).epsilon(1e-14));
  CHECK(parseval <= spec.c_dg() * spec.c_dg() * (1.0 + 1e-13));
}

TEST_CASE("adjoint identity") {
  auto lad = make_ladder(1.0, 2.0, 7);
  DiffusionSpec spec(lad, 7, ShapeProfile::tanh_profile, 0.5, 0.5, 0.75);
  std::mt19937_64 eng(48);
  const auto u = random_state(lad, eng);
  const auto w = random_state(lad, eng);
  std::vector<double> v(7);
  for (auto& x : v) x = std::normal_distribution<double>()(eng);
  // Re (G(u) v, w)_V = sum_m v_m (G*(u) w)_m for real-valued g
  const double lhs = weighted_inner(apply_G(u, v, spec), w, 0.0).real();
  const auto gs = apply_G_adjoint(u, w, spec);
  double rhs = 0.0;
  for (int m = 1; m <= 7; ++m) rhs += v[static_cast<std::size_t>(m - 1)] * gs[static_cast<std::size_t>(m - 1)];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}
