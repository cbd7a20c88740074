#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "shellflow/nonlinearity.hpp"

using namespace shellflow;

namespace {

SpectralState random_state(const LadderPtr& lad, std::mt19937_64& eng,
                           double amp = 1.0) {
  std::normal_distribution<double> N(0.0, amp);
  SpectralState u(lad);
  for (int n = 1; n <= u.n_shells(); ++n) u.mut(n) = cplx{N(eng), N(eng)};
  return u;
}

// Independent straightforward implementation of b_n on zero-padded arrays;
// deliberately written as a different code path from the library.
std::vector<cplx> bn_oracle(const SpectralState& u, const SpectralState& v,
                            const ShellCoefficients& c) {
  const int N = u.n_shells();
  const int off = 2;  // two zeros of padding on each side
  std::vector<cplx> up(static_cast<std::size_t>(N + 5)), vp(up.size()), k(up.size());
  for (int n = 1; n <= N; ++n) {
    up[static_cast<std::size_t>(n + off)] = u.at(n);
    vp[static_cast<std::size_t>(n + off)] = v.at(n);
  }
  for (int n = -2; n <= N + 2; ++n)
    k[static_cast<std::size_t>(n + off)] =
        n >= 0 ? u.ladder().k0() * std::pow(u.ladder().lambda(), n) : 0.0;
  std::vector<cplx> out(static_cast<std::size_t>(N + 1));
  const cplx i{0.0, 1.0};
  for (int n = 1; n <= N; ++n) {
    const auto U = [&](int j) { return up[static_cast<std::size_t>(j + off)]; };
    const auto V = [&](int j) { return vp[static_cast<std::size_t>(j + off)]; };
    const auto K = [&](int j) { return k[static_cast<std::size_t>(j + off)]; };
    if (c.kind == ShellModel::goy) {
      out[static_cast<std::size_t>(n)] =
          i * (c.a * K(n + 1) * std::conj(U(n + 1)) * std::conj(V(n + 2)) +
               c.b * K(n) * std::conj(U(n - 1)) * std::conj(V(n + 1)) -
               c.a * K(n - 1) * std::conj(U(n - 1)) * std::conj(V(n - 2)) -
               c.b * K(n - 1) * std::conj(U(n - 2)) * std::conj(V(n - 1)));
    } else {
      out[static_cast<std::size_t>(n)] =
          -i * (c.a * K(n + 1) * std::conj(U(n + 1)) * V(n + 2) +
                c.b * K(n) * std::conj(U(n - 1)) * V(n + 1) +
                c.a * K(n - 1) * U(n - 1) * V(n - 2) +
                c.b * K(n - 1) * U(n - 2) * V(n - 1));
    }
  }
  return out;
}

double scale3(const SpectralState& u, const SpectralState& v) {
  return weighted_norm(u, 0.5) * weighted_norm(v, 0.0) * weighted_norm(v, 0.0) +
         1e-300;
}

}  // namespace

TEST_CASE("apply_B zero and hand-computed GOY fixture") {
  auto lad = make_ladder(1.0, 2.0, 8);
  ShellCoefficients goy;  // a = 1, b = -1/2
  const SpectralState zero(lad);
  const auto bz = apply_B(zero, zero, goy);
  for (int n = 1; n <= 8; ++n) CHECK(bz.at(n) == cplx{0.0, 0.0});

  // u = v with u_1 = u_2 = 1: b_1 = b_2 = 0, b_3 = -4i(a+b), so the
  // component 3 of B is +4i(a+b) = 2i for a = 1, b = -1/2
  SpectralState u(lad);
  u.mut(1) = cplx{1.0, 0.0};
  u.mut(2) = cplx{1.0, 0.0};
  const auto b = apply_B(u, u, goy);
  CHECK(b.at(1) == cplx{0.0, 0.0});
  CHECK(b.at(2) == cplx{0.0, 0.0});
  CHECK(b.at(3).real() == doctest::Approx(0.0));
  CHECK(b.at(3).imag() == doctest::Approx(2.0).epsilon(1e-15));

  auto other = make_ladder(1.0, 3.0, 8);
  CHECK_THROWS_AS(apply_B(u, SpectralState(other), goy), std::invalid_argument);
}

TEST_CASE("apply_B matches the duplicate-formula oracle") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(21);
  for (ShellModel kind : {ShellModel::goy, ShellModel::sabra}) {
    ShellCoefficients c;
    c.kind = kind;
    c.a = 0.9;
    c.b = -0.4;
    for (int rep = 0; rep < 10; ++rep) {
      const auto u = random_state(lad, eng);
      const auto v = random_state(lad, eng);
      const auto got = apply_B(u, v, c);
      const auto want = bn_oracle(u, v, c);
      for (int n = 1; n <= 16; ++n) {
        const cplx w = -want[static_cast<std::size_t>(n)];
        CHECK(std::abs(got.at(n) - w) <= 1e-14 * (std::abs(w) + 1.0));
      }
    }
  }
}

TEST_CASE("energy cancellation and skew symmetry") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(22);
  for (ShellModel kind : {ShellModel::goy, ShellModel::sabra}) {
    ShellCoefficients c;
    c.kind = kind;
    c.a = std::uniform_real_distribution<double>(-2.0, 2.0)(eng);
    c.b = std::uniform_real_distribution<double>(-2.0, 2.0)(eng);
    for (int rep = 0; rep < 50; ++rep) {
      const auto u = random_state(lad, eng);
      const auto v = random_state(lad, eng);
      cplx sum{0.0, 0.0};
      for (int n = 1; n <= 16; ++n)
        sum += b_component(u, v, n, c) * std::conj(v.at(n));
      CHECK(std::abs(sum.real()) <= 1e-12 * scale3(u, v));

      const cplx tri = trilinear_form(u, v, v, c);
      if (kind == ShellModel::goy) {
        // full complex cancellation
        CHECK(std::abs(tri.real()) <= 1e-12 * scale3(u, v));
        CHECK(std::abs(tri.imag()) <= 1e-12 * scale3(u, v));
      } else {
        // SABRA cancels in the real pairing only
        CHECK(std::abs(tri.real()) <= 1e-12 * scale3(u, v));
      }
    }
  }
}

TEST_CASE("trilinear antisymmetry in (v, w)") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(23);
  ShellCoefficients goy;
  ShellCoefficients sabra;
  sabra.kind = ShellModel::sabra;
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_state(lad, eng);
    const auto v = random_state(lad, eng);
    const auto w = random_state(lad, eng);
    const double scl = weighted_norm(u, 0.5) * weighted_norm(v, 0.0) *
                           weighted_norm(w, 0.0) +
                       1e-300;
    const cplx g1 = trilinear_form(u, v, w, goy);
    const cplx g2 = trilinear_form(u, w, v, goy);
    CHECK(std::abs(g1 + g2) <= 1e-12 * scl);
    const cplx s1 = trilinear_form(u, v, w, sabra);
    const cplx s2 = trilinear_form(u, w, v, sabra);
    CHECK(std::abs(s1.real() + s2.real()) <= 1e-12 * scl);
  }
  const SpectralState zero(lad);
  CHECK(trilinear_form(zero, zero, zero, goy) == cplx{0.0, 0.0});
}

TEST_CASE("bilinearity over real scalars") {
  // B is real-bilinear only: u enters the four-term formulas conjugated, so
  // complex scalars pick up conjugates.
  auto lad = make_ladder(1.0, 2.0, 12);
  std::mt19937_64 eng(24);
  ShellCoefficients c;
  const auto u1 = random_state(lad, eng);
  const auto u2 = random_state(lad, eng);
  const auto v = random_state(lad, eng);
  const cplx a{1.7, 0.0}, b{-0.6, 0.0};
  const auto lhs = apply_B(add(scale(a, u1), scale(b, u2)), v, c);
  const auto rhs = add(scale(a, apply_B(u1, v, c)), scale(b, apply_B(u2, v, c)));
  for (int n = 1; n <= 12; ++n)
    CHECK(std::abs(lhs.at(n) - rhs.at(n)) <= 1e-13 * (std::abs(rhs.at(n)) + 1.0));
  // additivity in the second slot as well
  const auto lhs2 = apply_B(u1, add(v, u2), c);
  const auto rhs2 = add(apply_B(u1, v, c), apply_B(u1, u2, c));
  for (int n = 1; n <= 12; ++n)
    CHECK(std::abs(lhs2.at(n) - rhs2.at(n)) <= 1e-13 * (std::abs(rhs2.at(n)) + 1.0));
}

TEST_CASE("boundedness ratio does not grow with truncation") {
  // Lemma-style bound ||B(u,v)||_{V_{-a3}} <= c ||u||_{V_{a1}} ||v||_{V_{a2}};
  // the constant cap below is the fixture value recorded from this seed.
  std::mt19937_64 eng(25);
  ShellCoefficients c;
  const double cap = 4.0;
  const std::array<std::array<double, 3>, 3> combos = {
      {{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.5}}};
  for (const auto& combo : combos) {
    double worst16 = 0.0, worst64 = 0.0;
    for (int N : {16, 64}) {
      auto lad = make_ladder(1.0, 2.0, N);
      std::mt19937_64 eng2(25);  // same draws for both truncations
      double worst = 0.0;
      for (int rep = 0; rep < 1000; ++rep) {
        const auto u = random_state(lad, eng2);
        const auto v = random_state(lad, eng2);
        const double num = weighted_norm(apply_B(u, v, c), -combo[2]);
        const double den = weighted_norm(u, combo[0]) * weighted_norm(v, combo[1]);
        worst = std::max(worst, num / den);
      }
      (N == 16 ? worst16 : worst64) = worst;
    }
    INFO("combo a1=", combo[0], " a2=", combo[1], " a3=", combo[2],
         " ratio16=", worst16, " ratio64=", worst64);
    CHECK(worst16 <= cap);
    CHECK(worst64 <= cap);
    CHECK(worst64 <= worst16 * 1.25);
  }
}

TEST_CASE("truncation consistency under zero padding") {
  std::mt19937_64 eng(26);
  ShellCoefficients c;
  const int N = 12;
  auto lad_small = make_ladder(1.0, 2.0, N);
  auto lad_big = make_ladder(1.0, 2.0, N + 8);
  // supported on shells <= N-2
  SpectralState us(lad_small), vs(lad_small);
  SpectralState ub(lad_big), vb(lad_big);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int n = 1; n <= N - 2; ++n) {
    const cplx a{g(eng), g(eng)}, b{g(eng), g(eng)};
    us.mut(n) = a;
    ub.mut(n) = a;
    vs.mut(n) = b;
    vb.mut(n) = b;
  }
  const auto bs = apply_B(us, vs, c);
  const auto bb = apply_B(ub, vb, c);
  for (int n = 1; n <= N; ++n) CHECK(bs.at(n) == bb.at(n));
  for (int n = N + 1; n <= N + 8; ++n) CHECK(bb.at(n) == cplx{0.0, 0.0});
}

TEST_CASE("verification hook breaks the cancellation") {
  auto lad = make_ladder(1.0, 2.0, 16);
  std::mt19937_64 eng(27);
  ShellCoefficients broken;
  broken.first_term_sign = -1.0;
  const auto u = random_state(lad, eng);
  const auto v = random_state(lad, eng);
  cplx sum{0.0, 0.0};
  for (int n = 1; n <= 16; ++n)
    sum += b_component(u, v, n, broken) * std::conj(v.at(n));
  CHECK(std::abs(sum.real()) > 1e-6 * scale3(u, v));
}
