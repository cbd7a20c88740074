#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shellflow/spectral.hpp"

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

TEST_CASE("ladder invariants") {
  auto lad = make_ladder(1.0, 2.0, 8);
  CHECK(lad->k(0) == 1.0);
  CHECK(lad->k(1) == 2.0);
  CHECK(lad->k(8) == 256.0);
  for (int n = 1; n <= 8; ++n) CHECK(lad->k(n) > lad->k(n - 1));
  CHECK_THROWS_AS(make_ladder(-1.0, 2.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_ladder(1.0, 1.0, 8), std::invalid_argument);
}

TEST_CASE("weighted norm: zero, single mode, oracle") {
  auto lad = make_ladder(1.0, 2.0, 16);
  CHECK(weighted_norm(SpectralState(lad), 0.7) == 0.0);

  // e_1 at alpha = 1/2: k_1^{2 alpha} = 2
  const auto e1 = SpectralState::unit(lad, 1);
  CHECK(weighted_norm(e1, 0.5) == doctest::Approx(2.0).epsilon(1e-15));

  // independent term-by-term oracle in long double
  std::mt19937_64 eng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_state(lad, eng);
    const double alpha = std::uniform_real_distribution<double>(-1.0, 1.0)(eng);
    long double acc = 0.0L;
    for (int n = 1; n <= 16; ++n) {
      const long double k = std::pow(2.0L, static_cast<long double>(n));
      const long double w = std::pow(k, 4.0L * static_cast<long double>(alpha));
      acc += w * (static_cast<long double>(u.at(n).real()) * u.at(n).real() +
                  static_cast<long double>(u.at(n).imag()) * u.at(n).imag());
    }
    const double want = static_cast<double>(std::sqrt(acc));
    CHECK(weighted_norm(u, alpha) ==
          doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("weighted inner product") {
  auto lad = make_ladder(1.0, 2.0, 16);
  const auto e1 = SpectralState::unit(lad, 1);
  const auto e2 = SpectralState::unit(lad, 2);
  CHECK(weighted_inner(e1, e1, 0.0) == cplx{1.0, 0.0});
  CHECK(weighted_inner(e1, e2, 0.3) == cplx{0.0, 0.0});
  CHECK(weighted_inner(e1, e2, -0.8) == cplx{0.0, 0.0});

  std::mt19937_64 eng(12);
  const auto u = random_state(lad, eng);
  const auto v = random_state(lad, eng);
  // conjugate symmetry
  const cplx a = weighted_inner(u, v, 0.25);
  const cplx b = weighted_inner(v, u, 0.25);
  CHECK(std::abs(a - std::conj(b)) <= 1e-14 * std::abs(a));
  // (u,u) = ||u||^2, real
  const cplx uu = weighted_inner(u, u, 0.25);
  CHECK(uu.imag() == 0.0);
  const double nn = weighted_norm(u, 0.25);
  CHECK(uu.real() == doctest::Approx(nn * nn).epsilon(1e-14));

  auto other = make_ladder(1.0, 2.5, 16);
  CHECK_THROWS_AS(weighted_inner(u, SpectralState(other), 0.0),
                  std::invalid_argument);
}

TEST_CASE("lambda powers") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(13);
  const auto u = random_state(lad, eng);

  // gamma = 0 is the identity
  const auto id = apply_lambda_power(u, 0.0);
  for (int n = 1; n <= 16; ++n) CHECK(id.at(n) == u.at(n));

  // e_1 at gamma = 1/2: k_1 = 2
  const auto e1 = SpectralState::unit(lad, 1);
  CHECK(apply_lambda_power(e1, 0.5).at(1) == cplx{2.0, 0.0});

  // ||Lambda^g u|| = ||u||_{V_g}
  for (double g : {-0.5, 0.25, 1.0}) {
    CHECK(weighted_norm(apply_lambda_power(u, g), 0.0) ==
          doctest::Approx(weighted_norm(u, g)).epsilon(1e-13));
  }
}

TEST_CASE("semigroup basics and smoothing") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(14);
  const auto u = random_state(lad, eng);

  const auto same = semigroup_apply(0.0, u);
  for (int n = 1; n <= 16; ++n) CHECK(same.at(n) == u.at(n));

  // e_2, t = 0.1: k_2^2 = 16
  const auto e2 = SpectralState::unit(lad, 2);
  CHECK(semigroup_apply(0.1, e2).at(2).real() ==
        doctest::Approx(std::exp(-1.6)).epsilon(1e-15));

  CHECK_THROWS_AS(semigroup_apply(-0.1, u), std::invalid_argument);

  // S(t) S(s) = S(t+s)
  const auto two = semigroup_apply(0.03, semigroup_apply(0.07, u));
  const auto one = semigroup_apply(0.1, u);
  for (int n = 1; n <= 16; ++n)
    CHECK(std::abs(two.at(n) - one.at(n)) <= 1e-15 * std::abs(one.at(n)) + 1e-300);

  // smoothing: max_n k_n^{2 zeta} e^{-k_n^2 t} <= (zeta/e)^zeta t^{-zeta}
  for (double zeta : {0.25, 0.5}) {
    const double c = std::pow(zeta / std::exp(1.0), zeta);
    for (int i = 0; i <= 30; ++i) {
      const double t = std::pow(10.0, -3.0 + 3.0 * i / 30.0);
      double grid_max = 0.0;
      for (int n = 1; n <= 16; ++n) {
        const double k2 = lad->k(n) * lad->k(n);
        grid_max = std::max(grid_max, std::pow(k2, zeta) * std::exp(-k2 * t));
      }
      CHECK(grid_max <= c * std::pow(t, -zeta) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("embedding, interpolation, semigroup difference bound") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(15);

  // || u ||_{V_{a2}} <= k_1^{2(a2-a1)} || u ||_{V_{a1}} for a1 > a2
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_state(lad, eng);
    const double a1 = 0.5, a2 = -0.75;
    CHECK(weighted_norm(u, a2) <=
          std::pow(lad->k(1), 2.0 * (a2 - a1)) * weighted_norm(u, a1) *
              (1.0 + 1e-13));
  }

  // interpolation || Lambda^{1-d} v || <= c ||v||^{2d-1} ||Lambda^{1/2} v||^{2-2d}
  for (double d : {0.6, 0.75, 0.9}) {
    const auto e3 = SpectralState::unit(lad, 3);
    const double lhs1 = weighted_norm(apply_lambda_power(e3, 1.0 - d), 0.0);
    const double rhs1 = std::pow(weighted_norm(e3, 0.0), 2.0 * d - 1.0) *
                        std::pow(weighted_norm(apply_lambda_power(e3, 0.5), 0.0),
                                 2.0 - 2.0 * d);
    CHECK(lhs1 == doctest::Approx(rhs1).epsilon(1e-12));  // c = 1 on single modes

    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const auto v = random_state(lad, eng);
      const double lhs = weighted_norm(apply_lambda_power(v, 1.0 - d), 0.0);
      const double rhs = std::pow(weighted_norm(v, 0.0), 2.0 * d - 1.0) *
                         std::pow(weighted_norm(apply_lambda_power(v, 0.5), 0.0),
                                  2.0 - 2.0 * d);
      worst = std::max(worst, lhs / rhs);
    }
    INFO("measured interpolation constant ", worst);
    CHECK(worst <= 2.0);
  }

  // (1 - e^{-k^2 t}) k^{2 theta - 2 sigma} <= t^{sigma-theta} (c = 1)
  const double theta = 0.0, sigma = 0.7;
  for (int i = 0; i <= 20; ++i) {
    const double t = std::pow(10.0, -3.0 + 3.0 * i / 20.0);
    double grid_max = 0.0;
    for (int n = 1; n <= 16; ++n) {
      const double k2 = lad->k(n) * lad->k(n);
      grid_max = std::max(grid_max,
                          -std::expm1(-k2 * t) * std::pow(k2, theta - sigma));
    }
    CHECK(grid_max <= std::pow(t, sigma - theta) * (1.0 + 1e-12));
  }
}
