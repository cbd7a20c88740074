#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shellflow {

/// Sampling request for a fractional Brownian path on a uniform grid over
/// [0, horizon]. n_grid is the number of grid cells and must be a power of
/// two (the circulant embedding wants it). hurst must lie in (1/2, 1).
struct FbmSpec {
  double hurst = 0.75;
  double horizon = 1.0;
  std::size_t n_grid = 1024;
  std::uint64_t seed = 0;
  bool complex_pairing = false;  // pair two real fBms into one complex one

  void validate() const;  // throws std::invalid_argument naming the field
};

/// Diagonal trace-class covariance: weights q_1..q_M for the component fBms.
struct TraceClassCov {
  std::vector<double> q;

  /// q_i = ratio^i, i = 1..m.
  static TraceClassCov geometric(int m, double ratio);
  int modes() const { return static_cast<int>(q.size()); }
  double trace() const;
};

enum class PathKind { sampled, piecewise_linear };

/// Vector-valued sample path on the uniform grid t_j = j * horizon / m,
/// j = 0..m. Values are stored row-major (time x component). A
/// piecewise_linear path is linear between breakpoints spaced
/// segment_stride grid cells apart and can be evaluated anywhere in
/// [0, horizon]; a sampled path only carries its grid values.
class HilbertPath {
 public:
  HilbertPath(double horizon, std::size_t n_cells, int dim, PathKind kind);

  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / static_cast<double>(m_); }
  std::size_t n_cells() const { return m_; }
  int dim() const { return dim_; }
  PathKind kind() const { return kind_; }
  std::size_t segment_stride() const { return stride_; }
  void set_segment_stride(std::size_t s) { stride_ = s; }

  double value(std::size_t j, int comp) const {
    return values_[j * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(comp)];
  }
  double& value(std::size_t j, int comp) {
    return values_[j * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(comp)];
  }
  std::span<const double> row(std::size_t j) const {
    return {values_.data() + j * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  std::span<const double> raw() const { return values_; }

  /// Path value at arbitrary t. Piecewise-linear paths interpolate between
  /// breakpoints (exact); sampled paths require t to sit on the grid.
  std::vector<double> eval(double t) const;

  /// Segment slope at t (right-derivative convention at breakpoints).
  /// Only defined for piecewise_linear paths; throws otherwise -- raw fBm
  /// is nowhere differentiable.
  std::vector<double> derivative(double t) const;

  /// Euclidean norm of the increment between grid indices p < q.
  double increment_norm(std::size_t p, std::size_t q) const;

  struct Meta {
    double hurst = 0.0;
    bool dense_fallback = false;
    bool complex_pairing = false;
  };
  Meta meta;

 private:
  double horizon_;
  std::size_t m_;
  int dim_;
  PathKind kind_;
  std::size_t stride_ = 1;
  std::vector<double> values_;
};

/// Exact-in-law scalar fBm with covariance R(s,t) = (t^{2H}+s^{2H}-|t-s|^{2H})/2
/// via circulant embedding of fractional Gaussian noise; falls back to a
/// dense factorization of the covariance matrix when the embedding is not
/// PSD (flagged in meta.dense_fallback). Deterministic per seed.
HilbertPath sample_fbm_1d(const FbmSpec& spec);

/// V-valued fBm: component i is q_i^{1/2} times an independent scalar fBm.
/// With spec.complex_pairing the path carries 2M components, pairs
/// (2i, 2i+1) holding  independent real/imaginary parts each weighted
/// q_i^{1/2}/sqrt(2).
HilbertPath sample_fbm_hilbert(const FbmSpec& spec, const TraceClassCov& cov);

/// Piecewise-linear interpolant through every (n_grid / 2^level)-th sample.
/// 2^level must divide n_grid. Values are re-tabulated on the full grid;
/// the result equals the input at its breakpoints.
HilbertPath piecewise_linear_restrict(const HilbertPath& path, int level);

/// Grid proxy of the Hoelder seminorm |||omega|||_{beta'}: max over grid
/// pairs p < q of |omega(t_q) - omega(t_p)| / (t_q - t_p)^{beta'}. All
/// O(m^2) pairs for m <= 4096, dyadic-lag subsampling above.
double holder_seminorm(const HilbertPath& path, double beta_prime);
double holder_seminorm_serial(const HilbertPath& path, double beta_prime);

/// Componentwise difference a - b (same grid and dimension required).
HilbertPath path_difference(const HilbertPath& a, const HilbertPath& b);

/// Re-tabulate a piecewise-linear path on a uniform grid with m_new cells
/// (exact: evaluation between breakpoints is linear).
HilbertPath resample(const HilbertPath& path, std::size_t m_new);

/// Hurst exponent estimate from the log2 regression of RMS increments
/// against lag over dyadic lags. First component only.
double estimate_hurst(const HilbertPath& path);

}  // namespace shellflow
