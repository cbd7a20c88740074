#include "shellflow/noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <random>
#include <stdexcept>

namespace shellflow {

void FbmSpec::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw std::invalid_argument("fbm: hurst must lie in (1/2, 1)");
  if (!(horizon > 0.0)) throw std::invalid_argument("fbm: horizon must be > 0");
  if (n_grid < 2 || (n_grid & (n_grid - 1)) != 0)
    throw std::invalid_argument("fbm: n_grid must be a power of two >= 2");
}

TraceClassCov TraceClassCov::geometric(int m, double ratio) {
  if (m < 1) throw std::invalid_argument("cov: need at least one mode");
  if (!(ratio > 0.0)) throw std::invalid_argument("cov: ratio must be > 0");
  TraceClassCov c;
  c.q.resize(static_cast<std::size_t>(m));
  double w = 1.0;
  for (int i = 0; i < m; ++i) {
    w *= ratio;
    c.q[static_cast<std::size_t>(i)] = w;
  }
  return c;
}

double TraceClassCov::trace() const {
  double s = 0.0;
  for (double v : q) s += v;
  return s;
}

HilbertPath::HilbertPath(double horizon, std::size_t n_cells, int dim,
                         PathKind kind)
    : horizon_(horizon),
      m_(n_cells),
      dim_(dim),
      kind_(kind),
      values_((n_cells + 1) * static_cast<std::size_t>(dim)) {}

std::vector<double> HilbertPath::eval(double t) const {
  if (t < -1e-12 * horizon_ || t > horizon_ * (1.0 + 1e-12))
    throw std::invalid_argument("path: t outside [0, horizon]");
  t = std::clamp(t, 0.0, horizon_);
  const double h = dt();
  if (kind_ == PathKind::sampled) {
    const double jr = t / h;
    const std::size_t j = static_cast<std::size_t>(std::llround(jr));
    if (std::abs(jr - static_cast<double>(j)) > 1e-9)
      throw std::invalid_argument("path: sampled paths evaluate on the grid only");
    return {row(j).begin(), row(j).end()};
  }
  // Linear between breakpoints (exact for piecewise-linear paths).
  const double seg = h * static_cast<double>(stride_);
  double sidx = std::floor(t / seg);
  std::size_t s0 = static_cast<std::size_t>(sidx);
  if (s0 * stride_ >= m_) s0 = m_ / stride_ - 1;
  const std::size_t ja = s0 * stride_;
  const std::size_t jb = std::min(ja + stride_, m_);
  const double ta = static_cast<double>(ja) * h;
  const double tb = static_cast<double>(jb) * h;
  const double w = (t - ta) / (tb - ta);
  std::vector<double> out(static_cast<std::size_t>(dim_));
  for (int c = 0; c < dim_; ++c)
    out[static_cast<std::size_t>(c)] = (1.0 - w) * value(ja, c) + w * value(jb, c);
  return out;
}

std::vector<double> HilbertPath::derivative(double t) const {
  if (kind_ != PathKind::piecewise_linear)
    throw std::invalid_argument("path: derivative requires a piecewise-linear path");
  if (t < 0.0 || t > horizon_ * (1.0 + 1e-12))
    throw std::invalid_argument("path: t outside [0, horizon]");
  const double h = dt();
  const double seg = h * static_cast<double>(stride_);
  std::size_t s0 = static_cast<std::size_t>(std::floor(t / seg));
  if (s0 * stride_ >= m_) s0 = m_ / stride_ - 1;  // left-closed last segment
  const std::size_t ja = s0 * stride_;
  const std::size_t jb = std::min(ja + stride_, m_);
  const double len = static_cast<double>(jb - ja) * h;
  std::vector<double> out(static_cast<std::size_t>(dim_));
  for (int c = 0; c < dim_; ++c)
    out[static_cast<std::size_t>(c)] = (value(jb, c) - value(ja, c)) / len;
  return out;
}

double HilbertPath::increment_norm(std::size_t p, std::size_t q) const {
  double s = 0.0;
  const double* a = values_.data() + p * static_cast<std::size_t>(dim_);
  const double* b = values_.data() + q * static_cast<std::size_t>(dim_);
  for (int c = 0; c < dim_; ++c) {
    const double d = b[c] - a[c];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

// Box-Muller over mt19937_64: bit-deterministic across platforms, unlike
// std::normal_distribution.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  double next() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform_pos();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    cached_ = r * std::sin(th);
    have_ = true;
    return r * std::cos(th);
  }

 private:
  double uniform_pos() {
    // (0, 1]: never feeds log() a zero
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }
  std::mt19937_64 eng_;
  bool have_ = false;
  double cached_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 1));
}

// Autocovariance of unit-spacing fractional Gaussian noise.
double fgn_gamma(double H, std::size_t j) {
  const double x = static_cast<double>(j);
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(x + 1.0, h2) - 2.0 * std::pow(x, h2) +
                std::pow(std::abs(x - 1.0), h2));
}

std::mutex fftw_mutex;  // FFTW planning is not thread-safe

// One standard-normal increment block of length m (unit spacing), via
// Davies-Harte. Returns false if the circulant embedding has a negative
// eigenvalue, in which case out is untouched.
bool fgn_circulant(double H, std::size_t m, GaussianRng& rng,
                   std::vector<double>& out) {
  const std::size_t n = 2 * m;
  std::vector<std::complex<double>> buf(n);
  for (std::size_t j = 0; j <= m; ++j) buf[j] = fgn_gamma(H, j);
  for (std::size_t j = 1; j < m; ++j) buf[n - j] = buf[j];

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    plan = fftw_plan_dft_1d(static_cast<int>(n),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);

  std::vector<double> lam(n);
  double lam_max = 0.0, lam_min = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    lam[j] = buf[j].real();
    lam_max = std::max(lam_max, lam[j]);
    lam_min = std::min(lam_min, lam[j]);
  }
  if (lam_min < -1e-10 * std::max(1.0, lam_max)) {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(plan);
    return false;
  }

  // Spectral synthesis with Hermitian-symmetric Gaussian amplitudes.
  for (std::size_t j = 0; j < n; ++j) lam[j] = std::sqrt(std::max(lam[j], 0.0));
  buf[0] = lam[0] * rng.next();
  buf[m] = lam[m] * rng.next();
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t j = 1; j < m; ++j) {
    const double g1 = rng.next();
    const double g2 = rng.next();
    buf[j] = lam[j] * inv_sqrt2 * std::complex<double>(g1, g2);
    buf[n - j] = std::conj(buf[j]);
  }
  fftw_execute(plan);  // in-place, same plan: forward transform again
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(plan);
  }

  out.resize(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < m; ++j) out[j] = buf[j].real() * scale;
  return true;
}

// Dense fallback: Cholesky of the fGn covariance matrix.
void fgn_dense(double H, std::size_t m, GaussianRng& rng,
               std::vector<double>& out) {
  std::vector<double> L(m * m, 0.0);
  auto cov = [&](std::size_t i, std::size_t j) {
    return fgn_gamma(H, i > j ? i - j : j - i);
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = cov(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L[i * m + k] * L[j * m + k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("fbm: covariance not PSD");
        L[i * m + i] = std::sqrt(s);
      } else {
        L[i * m + j] = s / L[j * m + j];
      }
    }
  }
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = rng.next();
  out.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += L[i * m + k] * g[k];
    out[i] = s;
  }
}

// Scalar fBm values on the grid (unit variance at t = 1 when horizon = 1).
// Returns true if the dense fallback was used.
bool sample_scalar_fbm(double H, double horizon, std::size_t m,
                       std::uint64_t seed, std::vector<double>& path) {
  GaussianRng rng(seed);
  std::vector<double> incr;
  bool dense = false;
  if (!fgn_circulant(H, m, rng, incr)) {
    GaussianRng rng2(seed);  // fresh stream so the fallback is reproducible
    fgn_dense(H, m, rng2, incr);
    dense = true;
  }
  const double step_scale = std::pow(horizon / static_cast<double>(m), H);
  path.assign(m + 1, 0.0);
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    acc += incr[j] * step_scale;
    path[j + 1] = acc;
  }
  return dense;
}

}  // namespace

HilbertPath sample_fbm_1d(const FbmSpec& spec) {
  FbmSpec s = spec;
  s.complex_pairing = false;
  TraceClassCov unit;
  unit.q = {1.0};
  return sample_fbm_hilbert(s, unit);
}

HilbertPath sample_fbm_hilbert(const FbmSpec& spec, const TraceClassCov& cov) {
  spec.validate();
  if (cov.modes() < 1) throw std::invalid_argument("fbm: empty covariance");
  for (double qi : cov.q)
    if (!(qi > 0.0)) throw std::invalid_argument("fbm: q_i must be > 0");

  const int m_modes = cov.modes();
  const int dim = spec.complex_pairing ? 2 * m_modes : m_modes;
  HilbertPath path(spec.horizon, spec.n_grid, dim, PathKind::sampled);
  path.meta.hurst = spec.hurst;
  path.meta.complex_pairing = spec.complex_pairing;

  bool any_dense = false;
  std::vector<double> scalar;
  for (int c = 0; c < dim; ++c) {
    const int mode = spec.complex_pairing ? c / 2 : c;
    double w = std::sqrt(cov.q[static_cast<std::size_t>(mode)]);
    if (spec.complex_pairing) w /= std::sqrt(2.0);
    any_dense |= sample_scalar_fbm(spec.hurst, spec.horizon, spec.n_grid,
                                   derive_seed(spec.seed, static_cast<std::uint64_t>(c)),
                                   scalar);
    for (std::size_t j = 0; j <= spec.n_grid; ++j)
      path.value(j, c) = w * scalar[j];
  }
  path.meta.dense_fallback = any_dense;
  return path;
}

HilbertPath piecewise_linear_restrict(const HilbertPath& path, int level) {
  if (level < 0) throw std::invalid_argument("restrict: level must be >= 0");
  const std::size_t m = path.n_cells();
  const std::size_t pieces = static_cast<std::size_t>(1) << level;
  if (pieces > m || m % pieces != 0)
    throw std::invalid_argument("restrict: 2^level must divide n_grid");
  const std::size_t stride = m / pieces;

  HilbertPath out(path.horizon(), m, path.dim(), PathKind::piecewise_linear);
  out.meta = path.meta;
  out.set_segment_stride(stride);
  for (std::size_t s = 0; s < pieces; ++s) {
    const std::size_t ja = s * stride, jb = ja + stride;
    for (std::size_t j = ja; j <= jb; ++j) {
      const double w = static_cast<double>(j - ja) / static_cast<double>(stride);
      for (int c = 0; c < path.dim(); ++c)
        out.value(j, c) = (1.0 - w) * path.value(ja, c) + w * path.value(jb, c);
    }
  }
  return out;
}

namespace {

template <typename PairFn>
double pair_max(std::size_t m, bool all_pairs, PairFn&& fn) {
  double best = 0.0;
  if (all_pairs) {
#pragma omp parallel for reduction(max : best) schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(m); ++p)
      for (std::size_t q = static_cast<std::size_t>(p) + 1; q <= m; ++q)
        best = std::max(best, fn(static_cast<std::size_t>(p), q));
  } else {
    // dyadic lags: pairs (p, p + 2^j)
#pragma omp parallel for reduction(max : best) schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(m); ++p)
      for (std::size_t lag = 1; static_cast<std::size_t>(p) + lag <= m; lag <<= 1)
        best = std::max(best, fn(static_cast<std::size_t>(p),
                                 static_cast<std::size_t>(p) + lag));
  }
  return best;
}

template <typename PairFn>
double pair_max_serial(std::size_t m, bool all_pairs, PairFn&& fn) {
  double best = 0.0;
  if (all_pairs) {
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q <= m; ++q) best = std::max(best, fn(p, q));
  } else {
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t lag = 1; p + lag <= m; lag <<= 1)
        best = std::max(best, fn(p, p + lag));
  }
  return best;
}

constexpr std::size_t kAllPairsLimit = 4096;

}  // namespace

double holder_seminorm(const HilbertPath& path, double beta_prime) {
  if (!(beta_prime > 0.0 && beta_prime <= 1.0))
    throw std::invalid_argument("seminorm: beta' must lie in (0, 1]");
  const std::size_t m = path.n_cells();
  const double h = path.dt();
  auto fn = [&](std::size_t p, std::size_t q) {
    return path.increment_norm(p, q) /
           std::pow(static_cast<double>(q - p) * h, beta_prime);
  };
  return pair_max(m, m <= kAllPairsLimit, fn);
}

double holder_seminorm_serial(const HilbertPath& path, double beta_prime) {
  if (!(beta_prime > 0.0 && beta_prime <= 1.0))
    throw std::invalid_argument("seminorm: beta' must lie in (0, 1]");
  const std::size_t m = path.n_cells();
  const double h = path.dt();
  auto fn = [&](std::size_t p, std::size_t q) {
    return path.increment_norm(p, q) /
           std::pow(static_cast<double>(q - p) * h, beta_prime);
  };
  return pair_max_serial(m, m <= kAllPairsLimit, fn);
}

HilbertPath path_difference(const HilbertPath& a, const HilbertPath& b) {
  if (a.n_cells() != b.n_cells() || a.dim() != b.dim() ||
      a.horizon() != b.horizon())
    throw std::invalid_argument("path_difference: incompatible paths");
  HilbertPath out(a.horizon(), a.n_cells(), a.dim(), PathKind::sampled);
  out.meta = a.meta;
  for (std::size_t j = 0; j <= a.n_cells(); ++j)
    for (int c = 0; c < a.dim(); ++c)
      out.value(j, c) = a.value(j, c) - b.value(j, c);
  return out;
}

HilbertPath resample(const HilbertPath& path, std::size_t m_new) {
  if (path.kind() != PathKind::piecewise_linear)
    throw std::invalid_argument("resample: needs a piecewise-linear path");
  HilbertPath out(path.horizon(), m_new, path.dim(), PathKind::piecewise_linear);
  out.meta = path.meta;
  out.set_segment_stride(1);
  for (std::size_t j = 0; j <= m_new; ++j) {
    const double t = path.horizon() * static_cast<double>(j) / static_cast<double>(m_new);
    const auto v = path.eval(t);
    for (int c = 0; c < path.dim(); ++c) out.value(j, c) = v[static_cast<std::size_t>(c)];
  }
  return out;
}

double estimate_hurst(const HilbertPath& path) {
  const std::size_t m = path.n_cells();
  if (m < 8) throw std::invalid_argument("estimate_hurst: grid too small");
  // log2 E[(zeta(t+lag) - zeta(t))^2] = 2H log2(lag) + const
  std::vector<double> xs, ys;
  for (std::size_t lag = 1; lag <= m / 4; lag <<= 1) {
    double s2 = 0.0;
    std::size_t cnt = 0;
    for (std::size_t j = 0; j + lag <= m; ++j) {
      const double d = path.value(j + lag, 0) - path.value(j, 0);
      s2 += d * d;
      ++cnt;
    }
    xs.push_back(std::log2(static_cast<double>(lag)));
    ys.push_back(std::log2(s2 / static_cast<double>(cnt)));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return 0.5 * slope;
}

}  // namespace shellflow
