// Synthetic sensor streams, offline and paced replay through the filter bank,
// motor-command quantization and latency accounting.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "jointkf/multi_channel.hpp"
#include "jointkf/trace.hpp"

namespace jointkf {

// ---------------------------------------------------------------------------
// Simulation

struct ConstantTrajectory {
  double value = 0.0;
};

/// offset + amplitude * sin(2 pi row / period_rows)
struct SinusoidTrajectory {
  double offset = 0.0;
  double amplitude = 0.0;
  double period_rows = 1000.0;
};

/// Gaussian increments of `step_std`, reflected back into [lower, upper].
struct RandomWalkTrajectory {
  double start = 0.0;
  double step_std = 1.0;
  double lower = -1000.0;
  double upper = 1000.0;
};

using TrajectorySpec = std::variant<ConstantTrajectory, SinusoidTrajectory, RandomWalkTrajectory>;

struct SimulatedTrace {
  Trace noisy;
  Trace clean;
};

/// One column per entry of `noise_var`. Channel c draws its measurement noise
/// from stream 2c of `seed` and its random walk (if any) from stream 2c + 1.
/// Timestamps are row * 1000 / rate_hz milliseconds.
SimulatedTrace simulate_sensor(const TrajectorySpec& spec, const std::vector<double>& noise_var,
                               std::uint64_t seed, std::size_t rows, double rate_hz = 1000.0);

// ---------------------------------------------------------------------------
// Commands

struct QuantizeRange {
  std::int64_t min = -std::int64_t{2147483647};
  std::int64_t max = std::int64_t{2147483647};
};

/// Round half away from zero, then saturate to `range`. Throws CommandError
/// for non-finite input.
std::int64_t quantize_command(double filtered, const QuantizeRange& range = {});

struct MotorCommand {
  std::vector<std::int64_t> values;

  bool operator==(const MotorCommand&) const = default;
};

// ---------------------------------------------------------------------------
// Latency

/// Event time reported for the original glove control loop, kept alongside
/// the per-step budget for comparison.
inline constexpr double kReferenceEventTimeMs = 45.0;

struct LatencyReport {
  std::size_t samples_processed = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  double budget_ms = 1.0;
  double reference_event_time_ms = kReferenceEventTimeMs;
  /// Steps whose latency was not strictly below the budget.
  std::size_t violations = 0;
  /// Releases that found the hand-off full (real-time mode only).
  std::size_t backlogged = 0;
  double wall_time_s = 0.0;
  double throughput_sps = 0.0;
};

/// Nearest-rank percentiles over per-step latencies.
LatencyReport summarize_latencies(std::vector<double> latencies_ms, double budget_ms, double wall_time_s);

std::string format_report(const LatencyReport& report);

// ---------------------------------------------------------------------------
// Runs

struct RunOptions {
  double budget_ms = 1.0;
  QuantizeRange range{};
  ControlPolicy<double> u_policy{};
  /// Capacity of the producer -> consumer hand-off in real-time mode.
  std::size_t queue_capacity = 64;
};

struct RunResult {
  Trace filtered;
  std::vector<MotorCommand> commands;
  LatencyReport report;
};

/// Steps every sample as fast as possible; per-step time covers the filter
/// step and command quantization.
RunResult run_offline(const Trace& trace, MultiChannelFilter<double>& filter, const RunOptions& options = {});

/// Releases samples on a fixed 1/rate_hz schedule from a producer thread to
/// the filtering consumer. Step latency runs from a sample's actual release to
/// its command being ready. Filtered values equal run_offline's exactly.
RunResult run_realtime(const Trace& trace, MultiChannelFilter<double>& filter, double rate_hz,
                       const RunOptions& options = {});

// ---------------------------------------------------------------------------
// Smoothness

struct SmoothnessMetric {
  double raw_diff_var = 0.0;
  double filtered_diff_var = 0.0;
  /// filtered / raw; 1 when both are zero.
  double ratio = 0.0;
};

/// Unbiased first-difference variance per channel, over rows >= burn_in.
std::vector<SmoothnessMetric> smoothness_metrics(const Trace& raw, const Trace& filtered,
                                                 std::size_t burn_in = 0);

/// FNV-1a over the bit patterns of every filtered value, for determinism checks.
std::uint64_t checksum(const Trace& trace);

}  // namespace jointkf
