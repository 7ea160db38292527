// Per-channel measurement-noise configuration and its estimation from
// stationary captures.
//
// Config file (strict JSON, unknown keys rejected):
//
//   {
//     "version": 1,
//     "sample_rate_hz": 1000,        // optional, default 1000
//     "p0": 100,                     // optional, default 100
//     "step_budget_ms": 1.0,         // optional, default 1.0
//     "channels": [
//       {"index": 0, "label": "ch0", "r_var": 21.18, "q_scale": 1.0},
//       ...
//     ]
//   }
//
// Per channel, `index` must equal the array position, `r_var` is required and
// must be > 0, `label` defaults to "ch<index>" and `q_scale` to 1.0.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jointkf/multi_channel.hpp"
#include "jointkf/trace.hpp"

namespace jointkf {

struct ChannelCalibration {
  std::size_t channel_index = 0;
  double r_var = 1.0;
  std::string label;
  double q_scale = 1.0;

  bool operator==(const ChannelCalibration&) const = default;
};

struct SystemConfig {
  static constexpr int kVersion = 1;

  std::vector<ChannelCalibration> channels;
  double p0 = kDefaultInitialCovariance;
  double sample_rate_hz = 1000.0;
  double step_budget_ms = 1.0;

  std::size_t size() const noexcept { return channels.size(); }
  bool operator==(const SystemConfig&) const = default;
};

/// Diagonal of the 18-channel measurement covariance R from the glove
/// capture, in channel order.
inline constexpr double kGloveRVariances[18] = {21.18, 12.52, 10.62, 9.86, 26.94, 10.08,
                                                9.71,  17.58, 6.05,  9.91, 47.19, 11.04,
                                                7.56,  23.94, 26.82, 28.82, 27.69, 31.49};

/// Estimated variances below this are raised to it.
inline constexpr double kVarianceFloor = 1e-9;

/// 18 glove channels with the R diagonal above, Q = I, 1000 Hz.
SystemConfig default_config_18();

/// Config with one channel per variance, labels ch<i>, other fields default.
SystemConfig config_from_variances(const std::vector<double>& r_var);

/// Throws ValidationError naming the offending field.
void validate(const SystemConfig& cfg);

/// Per-channel measurement variance of a capture taken with the sensors held
/// still. Plain unbiased variance, or with `detrend` the unbiased variance of
/// first differences halved (removes slow drift). Results are floored at
/// kVarianceFloor. Throws InsufficientDataError for fewer than 2 rows.
Eigen::VectorXd estimate_r(const Trace& trace, bool detrend = false);

/// Replaces each channel's r_var with the estimate; creates channels as needed.
SystemConfig calibrated_config(const Trace& stationary, bool detrend, const SystemConfig& base);

SystemConfig load_config(const std::filesystem::path& path);
SystemConfig parse_config(const std::string& text);
void save_config(const SystemConfig& cfg, const std::filesystem::path& path);
std::string format_config(const SystemConfig& cfg);

/// Filter bank with Q = q_scale I and r = r_var per channel, dt = 1/rate.
MultiChannelFilter<double> make_filter(const SystemConfig& cfg,
                                       MeasurementPolicy policy = MeasurementPolicy::kSkipUpdate);

}  // namespace jointkf
