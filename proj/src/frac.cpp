#include "shellflow/frac.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shellflow {

FracOrder::FracOrder(double a) : alpha(a) {
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("frac: alpha must lie in (0, 1)");
}

double default_alpha(double beta_prime, double beta_hat) {
  return 0.5 * (1.0 - beta_prime + beta_hat);
}

double er_constant(double alpha, double beta_prime) {
  if (!(alpha + beta_prime > 1.0))
    throw std::invalid_argument("er_constant: need alpha + beta' > 1");
  return (1.0 + (1.0 - alpha) / (alpha + beta_prime - 1.0)) / std::tgamma(alpha);
}

double l3_constant(double alpha, double beta, double beta_prime, double length) {
  if (!(alpha < beta))
    throw std::invalid_argument("l3_constant: need alpha < beta");
  const double b1 = boost::math::beta(1.0 - alpha, alpha + beta_prime);
  const double b2 = boost::math::beta(1.0 + beta - alpha, alpha + beta_prime);
  return er_constant(alpha, beta_prime) / std::tgamma(1.0 - alpha) *
         (b1 + alpha / (beta - alpha) * b2 * std::pow(length, beta));
}

namespace {

// Power tables over lag distances d = 1..m: s = d*h.
struct PowTable {
  std::vector<double> neg;  // (d h)^{-e}
  std::vector<double> pos;  // (d h)^{1-e}
  PowTable(std::size_t m, double h, double e) : neg(m + 1), pos(m + 1) {
    for (std::size_t d = 1; d <= m; ++d) {
      const double s = static_cast<double>(d) * h;
      neg[d] = std::pow(s, -e);
      pos[d] = std::pow(s, 1.0 - e);
    }
  }
};

// Core of D^order_{t0+} f at index j >= 1: boundary term plus the singular
// difference integral, exact power-weight moments per cell, linear model of
// the difference per interior cell. Exact for piecewise-linear f.
//
// The cell adjacent to q = r models the vanishing difference as
// g(h) (s/h)^damp. With the smooth hint damp = 1 and two samples available,
// a quadratic-through-zero model a s + b s^2 is used instead; it degenerates
// to the linear one for (piecewise-)linear data and removes the h^{1+order}
// endpoint error on smooth integrands. For Hoelder data (damp < 1) the
// one-point damped model never overshoots the increment envelope.
double endpoint_moment(double g1, double g2, bool have_two, double h,
                       double order, double damp, const PowTable& pw) {
  if (damp == 1.0 && have_two) {
    const double a = (4.0 * g1 - g2) / (2.0 * h);
    const double b = (g2 - 2.0 * g1) / (2.0 * h * h);
    return a * pw.pos[1] / (1.0 - order) +
           b * h * pw.pos[1] / (2.0 - order);  // h * pos[1] = h^{2-order}
  }
  return g1 * pw.neg[1] / (damp - order);
}

double left_point_impl(std::span<const double> f, double h, std::size_t j,
                       double order, double damp, const PowTable& pw) {
  const double fj = f[j];
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < j; ++i) {
    const std::size_t d1 = j - i;
    const std::size_t d2 = j - i - 1;
    const double gi = fj - f[i];
    const double dg = (fj - f[i + 1]) - gi;
    const double m0 = (pw.neg[d2] - pw.neg[d1]) / order;
    const double m1 = (pw.pos[d1] - pw.pos[d2]) / (1.0 - order);
    // linear model g(s) = (gi + dg*d1) - (dg/h) s  in s = r - q
    integral += (gi + dg * static_cast<double>(d1)) * m0 - (dg / h) * m1;
  }
  integral += endpoint_moment(fj - f[j - 1], j >= 2 ? fj - f[j - 2] : 0.0,
                              j >= 2, h, order, damp, pw);
  return (fj * pw.neg[j] + order * integral) / std::tgamma(1.0 - order);
}

double right_point_impl(std::span<const double> f, double h, std::size_t j,
                        std::size_t m, double order, double damp,
                        const PowTable& pw) {
  if (j == m) return 0.0;
  const double fj = f[j];
  double integral =
      endpoint_moment(fj - f[j + 1], j + 2 <= m ? fj - f[j + 2] : 0.0,
                      j + 2 <= m, h, order, damp, pw);
  for (std::size_t i = j + 1; i < m; ++i) {
    const std::size_t d1 = i - j;      // s1 = d1 h (near edge, > 0)
    const std::size_t d2 = i - j + 1;  // s2 = d2 h (far edge)
    const double gi = fj - f[i];
    const double dg = (fj - f[i + 1]) - gi;
    const double m0 = (pw.neg[d1] - pw.neg[d2]) / order;
    const double m1 = (pw.pos[d2] - pw.pos[d1]) / (1.0 - order);
    // linear model g(s) = (gi - dg*d1) + (dg/h) s  in s = q - r
    integral += (gi - dg * static_cast<double>(d1)) * m0 + (dg / h) * m1;
  }
  return ((fj - f[m]) * pw.neg[m - j] + order * integral) /
         std::tgamma(1.0 - order);
}

void check_damp(double damp, double order, const char* who) {
  if (!(damp > order))
    throw std::invalid_argument(std::string(who) +
                                ": endpoint damping exponent must exceed the order");
}

}  // namespace

double frac_deriv_left(const GridFn& f, FracOrder alpha, std::size_t j,
                       double holder_damp) {
  if (j < 1 || j >= f.v.size())
    throw std::invalid_argument("frac_deriv_left: r must lie in (t0, t1]");
  check_damp(holder_damp, alpha.alpha, "frac_deriv_left");
  const PowTable pw(f.cells(), f.dt(), alpha.alpha);
  return left_point_impl(f.v, f.dt(), j, alpha.alpha, holder_damp, pw);
}

double frac_deriv_right(const GridFn& f, FracOrder alpha, std::size_t j,
                        double holder_damp) {
  const std::size_t m = f.cells();
  if (j > m)
    throw std::invalid_argument("frac_deriv_right: r must lie in [t0, t1]");
  const double order = 1.0 - alpha.alpha;
  check_damp(holder_damp, order, "frac_deriv_right");
  const PowTable pw(m, f.dt(), order);
  return right_point_impl(f.v, f.dt(), j, m, order, holder_damp, pw);
}

std::vector<double> frac_deriv_right(const HilbertPath& omega, FracOrder alpha,
                                     std::size_t j, std::size_t j2,
                                     double holder_damp) {
  if (j2 > omega.n_cells() || j >= j2 + 1)
    throw std::invalid_argument("frac_deriv_right: r must lie in [0, t_{j2})");
  const double order = 1.0 - alpha.alpha;
  check_damp(holder_damp, order, "frac_deriv_right");
  const PowTable pw(j2, omega.dt(), order);
  std::vector<double> out(static_cast<std::size_t>(omega.dim()));
  std::vector<double> comp(j2 + 1);
  for (int c = 0; c < omega.dim(); ++c) {
    for (std::size_t i = 0; i <= j2; ++i) comp[i] = omega.value(i, c);
    out[static_cast<std::size_t>(c)] =
        right_point_impl(comp, omega.dt(), j, j2, order, holder_damp, pw);
  }
  return out;
}

namespace {

template <bool Serial>
std::vector<double> left_table_any(const GridFn& f, double alpha, double damp) {
  check_damp(damp, alpha, "frac_deriv_left_table");
  const std::size_t m = f.cells();
  const PowTable pw(m, f.dt(), alpha);
  std::vector<double> out(m + 1);
  if (f.v[0] != 0.0)
    throw std::invalid_argument(
        "frac_deriv_left_table: index 0 has a limit only when f(t0) = 0");
  out[0] = 0.0;
  const double h = f.dt();
  if constexpr (Serial) {
    for (std::size_t j = 1; j <= m; ++j)
      out[j] = left_point_impl(f.v, h, j, alpha, damp, pw);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 1; j <= static_cast<std::ptrdiff_t>(m); ++j)
      out[static_cast<std::size_t>(j)] =
          left_point_impl(f.v, h, static_cast<std::size_t>(j), alpha, damp, pw);
  }
  return out;
}

template <bool Serial>
std::vector<double> right_table_any(const GridFn& f, double alpha, double damp) {
  const double order = 1.0 - alpha;
  check_damp(damp, order, "frac_deriv_right_table");
  const std::size_t m = f.cells();
  const PowTable pw(m, f.dt(), order);
  std::vector<double> out(m + 1);
  out[m] = 0.0;
  const double h = f.dt();
  if constexpr (Serial) {
    for (std::size_t j = 0; j < m; ++j)
      out[j] = right_point_impl(f.v, h, j, m, order, damp, pw);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(m); ++j)
      out[static_cast<std::size_t>(j)] =
          right_point_impl(f.v, h, static_cast<std::size_t>(j), m, order, damp, pw);
  }
  return out;
}

}  // namespace

std::vector<double> frac_deriv_left_table(const GridFn& f, FracOrder alpha,
                                          double holder_damp) {
  return left_table_any<false>(f, alpha.alpha, holder_damp);
}
std::vector<double> frac_deriv_left_table_serial(const GridFn& f, FracOrder alpha,
                                                 double holder_damp) {
  return left_table_any<true>(f, alpha.alpha, holder_damp);
}
std::vector<double> frac_deriv_right_table(const GridFn& f, FracOrder alpha,
                                           double holder_damp) {
  return right_table_any<false>(f, alpha.alpha, holder_damp);
}
std::vector<double> frac_deriv_right_table_serial(const GridFn& f, FracOrder alpha,
                                                  double holder_damp) {
  return right_table_any<true>(f, alpha.alpha, holder_damp);
}

double weighted_singular_integral(std::span<const double> g, double s, double t,
                                  double a, double b) {
  if (g.size() < 2)
    throw std::invalid_argument("weighted_singular_integral: need >= 2 samples");
  if (!(a > -1.0 && b > -1.0))
    throw std::invalid_argument("weighted_singular_integral: exponents must be > -1");
  const std::size_t m = g.size() - 1;
  const double len = t - s;
  const double h = len / static_cast<double>(m);

  // Incomplete-beta antiderivatives at the grid fractions.
  std::vector<double> I0(m + 1), I1(m + 1);
  I0[0] = 0.0;
  I1[0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(m);
    if (i == m) {
      I0[i] = boost::math::beta(a + 1.0, b + 1.0);
      I1[i] = boost::math::beta(a + 2.0, b + 1.0);
    } else {
      I0[i] = boost::math::beta(a + 1.0, b + 1.0, x);
      I1[i] = boost::math::beta(a + 2.0, b + 1.0, x);
    }
  }
  const double w0 = std::pow(len, a + b + 1.0);
  const double w1 = std::pow(len, a + b + 2.0);

  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double m0 = w0 * (I0[i + 1] - I0[i]);
    const double m1 = w1 * (I1[i + 1] - I1[i]);  // int (r-s) w dr over the cell
    const double xi = static_cast<double>(i) * h;  // r_i - s
    const double dg = g[i + 1] - g[i];
    acc += g[i] * m0 + (dg / h) * (m1 - xi * m0);
  }
  return acc;
}

namespace {

void check_window(double alpha, const RegularityWindow& w) {
  if (!(1.0 - w.beta_prime < alpha && alpha < w.beta))
    throw std::invalid_argument(
        "young: alpha outside the admissible window (1-beta', beta)");
}

// Young integral of grid samples with the constant part of z split off;
// workhorse beneath the public scalar/operator versions. zt must satisfy
// zt[0] = 0 (caller subtracts z(t0)).
double young_core(std::span<const double> zt, std::span<const double> Dzeta,
                  double t0, double t1, double alpha,
                  const RegularityWindow& win, const PowTable& pw_left) {
  const std::size_t m = zt.size() - 1;
  const double h = (t1 - t0) / static_cast<double>(m);
  const double a = win.beta - alpha;
  const double b = alpha + win.beta_prime - 1.0;

  std::vector<double> G(m + 1);
  for (std::size_t j = 1; j < m; ++j) {
    const double Dz = left_point_impl(zt, h, j, alpha, win.beta, pw_left);
    const double F = -Dz * Dzeta[j];
    const double rl = static_cast<double>(j) * h;
    const double rr = static_cast<double>(m - j) * h;
    G[j] = F * std::pow(rl, -a) * std::pow(rr, -b);
  }
  G[0] = G[1];
  G[m] = G[m - 1];
  return weighted_singular_integral(G, t0, t1, a, b);
}

std::vector<double> subsample2(std::span<const double> v) {
  std::vector<double> out((v.size() - 1) / 2 + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[2 * i];
  return out;
}

}  // namespace

IntegralResult young_integral_scalar(const GridFn& z, const GridFn& zeta,
                                     FracOrder alpha, RegularityWindow window) {
  if (z.v.size() != zeta.v.size() || z.t0 != zeta.t0 || z.t1 != zeta.t1)
    throw std::invalid_argument("young: z and zeta must share the grid");
  check_window(alpha.alpha, window);
  const std::size_t m = z.cells();
  const double h = z.dt();

  const double base = z.v[0] * (zeta.v[m] - zeta.v[0]);
  std::vector<double> zt(z.v.begin(), z.v.end());
  for (double& x : zt) x -= z.v[0];

  GridFn zres{z.t0, z.t1, zeta.v};
  const auto Dzeta = frac_deriv_right_table(zres, alpha, window.beta_prime);
  const PowTable pw(m, h, alpha.alpha);
  const double fine =
      base + young_core(zt, Dzeta, z.t0, z.t1, alpha.alpha, window, pw);

  double err = std::numeric_limits<double>::quiet_NaN();
  if (m % 2 == 0 && m >= 4) {
    GridFn zc{z.t0, z.t1, subsample2(z.v)};
    GridFn zetac{z.t0, z.t1, subsample2(zeta.v)};
    std::vector<double> ztc(zc.v.begin(), zc.v.end());
    for (double& x : ztc) x -= zc.v[0];
    const auto Dzetac = frac_deriv_right_table(zetac, alpha, window.beta_prime);
    const PowTable pwc(m / 2, 2.0 * h, alpha.alpha);
    const double coarse =
        base + young_core(ztc, Dzetac, z.t0, z.t1, alpha.alpha, window, pwc);
    err = std::abs(fine - coarse);
  }
  return {fine, err};
}

double OperatorPath::sup_hs_norm() const {
  double best = 0.0;
  for (std::size_t j = 0; j <= m; ++j) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) s += std::norm(at(j, r, c));
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

double OperatorPath::holder_seminorm_hs(double beta) const {
  const double h = dt();
  double best = 0.0;
  auto incr = [&](std::size_t p, std::size_t q) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) s += std::norm(at(q, r, c) - at(p, r, c));
    return std::sqrt(s) / std::pow(static_cast<double>(q - p) * h, beta);
  };
  if (m <= 1024) {
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q <= m; ++q) best = std::max(best, incr(p, q));
  } else {
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t lag = 1; p + lag <= m; lag <<= 1)
        best = std::max(best, incr(p, p + lag));
  }
  return best;
}

namespace {

// Shared assembly for the operator Young integral, with an optional
// semigroup damping factor e^{-k_row^2 (t - r)} folded into the integrand.
VectorIntegralResult operator_young_impl(const OperatorPath& Z,
                                         const HilbertPath& omega,
                                         FracOrder alpha,
                                         RegularityWindow window,
                                         const WavenumberLadder* ladder,
                                         double t_end) {
  if (omega.n_cells() != Z.m || omega.dim() != Z.cols)
    throw std::invalid_argument("young_operator: Z and omega grids/dims differ");
  check_window(alpha.alpha, window);
  const std::size_t m = Z.m;
  const double h = Z.dt();
  const double t0 = 0.0, t1 = Z.horizon;

  // Right-derivative tables per noise component, shared across output rows;
  // a stride-2 coarsening of everything feeds the error estimate.
  const bool can_coarsen = (m % 2 == 0 && m >= 4);
  const std::size_t mc = m / 2;
  std::vector<std::vector<double>> Dzeta(static_cast<std::size_t>(Z.cols));
  std::vector<std::vector<double>> Dzeta_c(static_cast<std::size_t>(Z.cols));
  for (int c = 0; c < Z.cols; ++c) {
    GridFn comp{t0, t1, {}};
    comp.v.resize(m + 1);
    for (std::size_t j = 0; j <= m; ++j) comp.v[j] = omega.value(j, c);
    Dzeta[static_cast<std::size_t>(c)] =
        frac_deriv_right_table(comp, alpha, window.beta_prime);
    if (can_coarsen) {
      GridFn compc{t0, t1, subsample2(comp.v)};
      Dzeta_c[static_cast<std::size_t>(c)] =
          frac_deriv_right_table(compc, alpha, window.beta_prime);
    }
  }

  const PowTable pw(m, h, alpha.alpha);
  const PowTable pwc(can_coarsen ? mc : 1, 2.0 * h, alpha.alpha);
  std::vector<cplx> value(static_cast<std::size_t>(Z.rows));
  double err = 0.0;

#pragma omp parallel for schedule(dynamic) reduction(+ : err)
  for (int r = 0; r < Z.rows; ++r) {
    const double damp_k =
        ladder ? std::pow(ladder->k(r + 1), 2.0) : 0.0;  // rows are shells 1..N
    std::vector<double> part(m + 1), zt(m + 1);
    cplx acc{0.0, 0.0};
    cplx acc_c{0.0, 0.0};
    for (int c = 0; c < Z.cols; ++c) {
      const double dom = omega.value(m, c) - omega.value(0, c);
      for (int reim = 0; reim < 2; ++reim) {
        bool nonzero = false;
        for (std::size_t j = 0; j <= m; ++j) {
          const double kern =
              ladder ? std::exp(-damp_k * (t_end - static_cast<double>(j) * h)) : 1.0;
          const cplx v = Z.at(j, r, c) * kern;
          part[j] = (reim == 0) ? v.real() : v.imag();
          nonzero |= part[j] != 0.0;
        }
        if (!nonzero) continue;
        const double base = part[0] * dom;
        for (std::size_t j = 0; j <= m; ++j) zt[j] = part[j] - part[0];
        const double piece =
            base + young_core(zt, Dzeta[static_cast<std::size_t>(c)], t0, t1,
                              alpha.alpha, window, pw);
        acc += (reim == 0) ? cplx{piece, 0.0} : cplx{0.0, piece};
        if (can_coarsen) {
          const auto ztc = subsample2(zt);
          const double piece_c =
              base + young_core(ztc, Dzeta_c[static_cast<std::size_t>(c)], t0, t1,
                                alpha.alpha, window, pwc);
          acc_c += (reim == 0) ? cplx{piece_c, 0.0} : cplx{0.0, piece_c};
        }
      }
    }
    value[static_cast<std::size_t>(r)] = acc;
    if (can_coarsen) err += std::abs(acc - acc_c);
  }

  VectorIntegralResult out;
  out.value = std::move(value);
  out.error_estimate = err;
  const double om_semi = holder_seminorm(omega, window.beta_prime);
  const double znorm = Z.sup_hs_norm() + Z.holder_seminorm_hs(window.beta);
  out.l3_bound = l3_constant(alpha.alpha, window.beta, window.beta_prime, t1) *
                 znorm * om_semi * std::pow(t1, window.beta_prime);
  return out;
}

}  // namespace

VectorIntegralResult young_integral_operator(const OperatorPath& Z,
                                             const HilbertPath& omega,
                                             FracOrder alpha,
                                             RegularityWindow window) {
  return operator_young_impl(Z, omega, alpha, window, nullptr, 0.0);
}

VectorIntegralResult semigroup_convolution(double t, const OperatorPath& G_of_u,
                                           const HilbertPath& omega,
                                           FracOrder alpha,
                                           const WavenumberLadder& ladder,
                                           RegularityWindow window) {
  if (std::abs(G_of_u.horizon - t) > 1e-12 * std::max(1.0, t))
    throw std::invalid_argument("semigroup_convolution: G path must cover [0, t]");
  if (t == 0.0) {
    VectorIntegralResult out;
    out.value.assign(static_cast<std::size_t>(G_of_u.rows), cplx{0.0, 0.0});
    return out;
  }
  return operator_young_impl(G_of_u, omega, alpha, window, &ladder, t);
}

}  // namespace shellflow
