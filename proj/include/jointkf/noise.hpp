// Seeded Gaussian sample generation: basic (trigonometric) Box-Muller and a
// Galton-board binomial approximation, plus moment/histogram checks.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace jointkf {

/// Uniform doubles in (0, 1]: a 64-bit draw k maps to (k + 1) * 2^-64.
/// Backed by std::mt19937_64 (period 2^19937 - 1).
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  /// Independent source for sub-stream `stream` of `seed` (splitmix64 mixing),
  /// used to give each channel or worker its own reproducible sequence.
  static UniformSource for_stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double operator()() { return (static_cast<double>(engine_()) + 1.0) * 0x1p-64; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// (sqrt(-2 ln u1) cos(2 pi u2), sqrt(-2 ln u1) sin(2 pi u2)).
/// Throws DomainError unless 0 < u1 <= 1 and 0 <= u2 <= 1.
std::pair<double, double> box_muller_pair(double u1, double u2);

/// mean + stddev * z_i. Both values of every Box-Muller pair are used before
/// the next two uniforms are drawn (u1 first, then u2).
Eigen::VectorXd gaussian_stream(UniformSource& source, std::size_t count, double mean = 0.0,
                                double stddev = 1.0);

struct GaltonConfig {
  int rows = 64;
};

/// Number of rightward bounces (u > 0.5) over cfg.rows pin rows; in [0, rows].
int galton_sample(UniformSource& source, const GaltonConfig& cfg);

/// (bin - n/2) / sqrt(n/4).
double galton_standardize(int bin, const GaltonConfig& cfg);
double galton_standardized(UniformSource& source, const GaltonConfig& cfg);

struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  /// Unbiased (n - 1 divisor).
  double variance = 0.0;
  /// Moment-ratio estimators m3/m2^1.5 and m4/m2^2 - 3; zero when m2 == 0.
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Throws InsufficientDataError when fewer than two samples are given.
SampleStats normality_stats(const Eigen::Ref<const Eigen::VectorXd>& samples);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  std::uint64_t total() const;
  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Equal-width bins over [lo, hi]; hi itself falls in the last bin. Samples
/// outside the range (and NaN, as overflow) go to the overflow buckets.
Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& samples, std::size_t bin_count, double lo,
                    double hi);

}  // namespace jointkf
