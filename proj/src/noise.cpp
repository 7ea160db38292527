#include "jointkf/noise.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "jointkf/errors.hpp"

namespace jointkf {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

UniformSource UniformSource::for_stream(std::uint64_t seed, std::uint64_t stream) {
  return UniformSource(mix_seed(seed, stream));
}

std::pair<double, double> box_muller_pair(double u1, double u2) {
  if (!(u1 > 0.0 && u1 <= 1.0)) {
    throw DomainError("box_muller_pair: u1 must lie in (0, 1]");
  }
  if (!(u2 >= 0.0 && u2 <= 1.0)) {
    throw DomainError("box_muller_pair: u2 must lie in [0, 1]");
  }
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

Eigen::VectorXd gaussian_stream(UniformSource& source, std::size_t count, double mean, double stddev) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev) || !std::isfinite(mean)) {
    throw ParameterError("gaussian_stream: stddev must be finite and >= 0, mean finite");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(count));
  std::size_t i = 0;
  while (i < count) {
    const double u1 = source();
    const double u2 = source();
    const auto [z0, z1] = box_muller_pair(u1, u2);
    out[static_cast<Eigen::Index>(i++)] = mean + stddev * z0;
    if (i < count) out[static_cast<Eigen::Index>(i++)] = mean + stddev * z1;
  }
  return out;
}

int galton_sample(UniformSource& source, const GaltonConfig& cfg) {
  if (cfg.rows < 1) {
    throw ParameterError("galton rows must be >= 1");
  }
  int bin = 0;
  for (int r = 0; r < cfg.rows; ++r) {
    if (source() > 0.5) ++bin;
  }
  return bin;
}

double galton_standardize(int bin, const GaltonConfig& cfg) {
  if (cfg.rows < 1) {
    throw ParameterError("galton rows must be >= 1");
  }
  const double n = cfg.rows;
  return (bin - n / 2.0) / std::sqrt(n / 4.0);
}

double galton_standardized(UniformSource& source, const GaltonConfig& cfg) {
  return galton_standardize(galton_sample(source, cfg), cfg);
}

SampleStats normality_stats(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  const auto n = samples.size();
  if (n < 2) {
    throw InsufficientDataError("normality_stats needs at least 2 samples");
  }
  SampleStats stats;
  stats.n = static_cast<std::size_t>(n);
  stats.mean = samples.mean();
  const Eigen::ArrayXd centered = samples.array() - stats.mean;
  const Eigen::ArrayXd sq = centered.square();
  const double m2 = sq.mean();
  const double m3 = (sq * centered).mean();
  const double m4 = sq.square().mean();
  stats.variance = sq.sum() / static_cast<double>(n - 1);
  if (m2 > 0.0) {
    stats.skewness = m3 / std::pow(m2, 1.5);
    stats.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return stats;
}

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), underflow + overflow);
}

Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& samples, std::size_t bin_count, double lo,
                    double hi) {
  if (bin_count < 1) {
    throw ParameterError("histogram needs at least one bin");
  }
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ParameterError("histogram range must satisfy lo < hi");
  }
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bin_count, 0);
  const double scale = static_cast<double>(bin_count) / (hi - lo);
  for (const double x : samples) {
    if (x < lo) {
      ++h.underflow;
    } else if (!(x <= hi)) {
      ++h.overflow;
    } else {
      auto bin = static_cast<std::size_t>((x - lo) * scale);
      if (bin >= bin_count) bin = bin_count - 1;
      ++h.counts[bin];
    }
  }
  return h;
}

}  // namespace jointkf
