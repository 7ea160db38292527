#include "jointkf/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "bounded_queue.hpp"
#include "jointkf/errors.hpp"
#include "jointkf/noise.hpp"

namespace jointkf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

double reflect(double x, double lower, double upper) {
  const double width = upper - lower;
  if (width <= 0) return lower;
  // fold onto [lower, lower + 2 width) then mirror the upper half
  double y = std::fmod(x - lower, 2.0 * width);
  if (y < 0) y += 2.0 * width;
  return y <= width ? lower + y : upper - (y - width);
}

void validate_spec(const TrajectorySpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantTrajectory>) {
          if (!std::isfinite(s.value)) throw ParameterError("constant value must be finite");
        } else if constexpr (std::is_same_v<T, SinusoidTrajectory>) {
          if (!std::isfinite(s.offset) || !std::isfinite(s.amplitude)) {
            throw ParameterError("sinusoid offset and amplitude must be finite");
          }
          if (!(s.period_rows > 0) || !std::isfinite(s.period_rows)) {
            throw ParameterError("sinusoid period must be > 0");
          }
        } else {
          if (!(s.step_std >= 0) || !std::isfinite(s.step_std)) {
            throw ParameterError("random-walk step stddev must be >= 0");
          }
          if (!(s.lower < s.upper) || !std::isfinite(s.lower) || !std::isfinite(s.upper)) {
            throw ParameterError("random-walk bounds must satisfy lower < upper");
          }
          if (!(s.start >= s.lower && s.start <= s.upper)) {
            throw ParameterError("random-walk start must lie within its bounds");
          }
        }
      },
      spec);
}

Eigen::VectorXd clean_column(const TrajectorySpec& spec, std::size_t rows, std::uint64_t seed, std::size_t channel) {
  const auto n = static_cast<Eigen::Index>(rows);
  return std::visit(
      [&](const auto& s) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantTrajectory>) {
          return Eigen::VectorXd::Constant(n, s.value);
        } else if constexpr (std::is_same_v<T, SinusoidTrajectory>) {
          const Eigen::ArrayXd k = Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n) - 1.0);
          return (s.offset + s.amplitude * (2.0 * std::numbers::pi * k / s.period_rows).sin()).matrix();
        } else {
          Eigen::VectorXd out(n);
          auto source = UniformSource::for_stream(seed, 2 * channel + 1);
          const Eigen::VectorXd steps = gaussian_stream(source, rows, 0.0, s.step_std);
          double x = s.start;
          for (Eigen::Index i = 0; i < n; ++i) {
            if (i > 0) x = reflect(x + steps[i], s.lower, s.upper);
            out[i] = x;
          }
          return out;
        }
      },
      spec);
}

void step_and_command(MultiChannelFilter<double>& filter, std::span<const double> z, std::span<double> out,
                      std::size_t row, const RunOptions& options, MotorCommand& command) {
  filter.step_row(z, out, row, options.u_policy);
  command.values.resize(out.size());
  for (std::size_t c = 0; c < out.size(); ++c) command.values[c] = quantize_command(out[c], options.range);
}

void check_shape(const Trace& trace, const MultiChannelFilter<double>& filter) {
  if (trace.channels() != filter.size()) {
    throw ShapeError("trace has " + std::to_string(trace.channels()) + " channels, filter has " +
                     std::to_string(filter.size()));
  }
}

}  // namespace

SimulatedTrace simulate_sensor(const TrajectorySpec& spec, const std::vector<double>& noise_var, std::uint64_t seed,
                               std::size_t rows, double rate_hz) {
  validate_spec(spec);
  if (noise_var.empty()) {
    throw ParameterError("simulate_sensor needs at least one channel");
  }
  for (const double v : noise_var) {
    if (!(v >= 0) || !std::isfinite(v)) throw ParameterError("noise variance must be >= 0");
  }
  if (!(rate_hz > 0) || !std::isfinite(rate_hz)) {
    throw ParameterError("rate_hz must be > 0");
  }
  const std::size_t n = noise_var.size();
  Eigen::MatrixXd clean(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd noisy(clean.rows(), clean.cols());
  for (std::size_t c = 0; c < n; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    clean.col(col) = clean_column(spec, rows, seed, c);
    auto source = UniformSource::for_stream(seed, 2 * c);
    noisy.col(col) = clean.col(col) + gaussian_stream(source, rows, 0.0, std::sqrt(noise_var[c]));
  }
  SimulatedTrace out{Trace(n), Trace(n)};
  out.noisy.reserve(rows);
  out.clean.reserve(rows);
  std::vector<double> row(n);
  const double period_ms = 1000.0 / rate_hz;
  for (Eigen::Index r = 0; r < clean.rows(); ++r) {
    const double t = static_cast<double>(r) * period_ms;
    Eigen::Map<Eigen::RowVectorXd>(row.data(), clean.cols()) = noisy.row(r);
    out.noisy.push_back(t, row);
    Eigen::Map<Eigen::RowVectorXd>(row.data(), clean.cols()) = clean.row(r);
    out.clean.push_back(t, row);
  }
  return out;
}

std::int64_t quantize_command(double filtered, const QuantizeRange& range) {
  if (!std::isfinite(filtered)) {
    throw CommandError("cannot quantize a non-finite value");
  }
  if (filtered >= static_cast<double>(range.max)) return range.max;
  if (filtered <= static_cast<double>(range.min)) return range.min;
  return std::clamp(static_cast<std::int64_t>(std::round(filtered)), range.min, range.max);
}

LatencyReport summarize_latencies(std::vector<double> latencies_ms, double budget_ms, double wall_time_s) {
  LatencyReport report;
  report.budget_ms = budget_ms;
  report.wall_time_s = wall_time_s;
  report.samples_processed = latencies_ms.size();
  if (latencies_ms.empty()) return report;
  const std::size_t n = latencies_ms.size();
  report.mean_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) / static_cast<double>(n);
  report.violations = static_cast<std::size_t>(
      std::count_if(latencies_ms.begin(), latencies_ms.end(), [&](double l) { return !(l < budget_ms); }));
  std::sort(latencies_ms.begin(), latencies_ms.end());
  const auto rank = [&](double p) {
    const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    return latencies_ms[std::clamp<std::size_t>(k, 1, n) - 1];
  };
  report.p50_ms = rank(0.50);
  report.p99_ms = rank(0.99);
  report.max_ms = latencies_ms.back();
  report.throughput_sps = wall_time_s > 0 ? static_cast<double>(n) / wall_time_s : 0.0;
  return report;
}

std::string format_report(const LatencyReport& r) {
  nlohmann::ordered_json doc;
  doc["samples_processed"] = r.samples_processed;
  doc["mean_ms"] = r.mean_ms;
  doc["p50_ms"] = r.p50_ms;
  doc["p99_ms"] = r.p99_ms;
  doc["max_ms"] = r.max_ms;
  doc["budget_ms"] = r.budget_ms;
  doc["reference_event_time_ms"] = r.reference_event_time_ms;
  doc["violations"] = r.violations;
  doc["backlogged"] = r.backlogged;
  doc["wall_time_s"] = r.wall_time_s;
  doc["throughput_sps"] = r.throughput_sps;
  return doc.dump(2) + "\n";
}

RunResult run_offline(const Trace& trace, MultiChannelFilter<double>& filter, const RunOptions& options) {
  check_shape(trace, filter);
  RunResult result{Trace(trace.labels()), {}, {}};
  result.filtered.reserve(trace.rows());
  result.commands.resize(trace.rows());
  std::vector<double> latencies(trace.rows());
  std::vector<double> out(filter.size());
  const auto data = trace.data();
  const std::size_t n = trace.channels();

  const auto start = Clock::now();
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    const auto t0 = Clock::now();
    step_and_command(filter, data.subspan(r * n, n), out, r, options, result.commands[r]);
    const auto t1 = Clock::now();
    latencies[r] = elapsed_ms(t0, t1);
    result.filtered.push_back(trace.t_ms(r), out);
  }
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  result.report = summarize_latencies(std::move(latencies), options.budget_ms, wall);
  return result;
}

RunResult run_realtime(const Trace& trace, MultiChannelFilter<double>& filter, double rate_hz,
                       const RunOptions& options) {
  if (!(rate_hz > 0) || !std::isfinite(rate_hz)) {
    throw ParameterError("rate_hz must be > 0");
  }
  check_shape(trace, filter);

  struct Release {
    std::size_t row;
    Clock::time_point at;
  };
  detail::BoundedQueue<Release> queue(options.queue_capacity);
  std::size_t backlogged = 0;
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / rate_hz));
  const std::size_t rows = trace.rows();
  const auto start = Clock::now();

  std::jthread producer([&] {
    for (std::size_t r = 0; r < rows; ++r) {
      std::this_thread::sleep_until(start + period * static_cast<std::int64_t>(r));
      const Release item{r, Clock::now()};
      if (!queue.try_push(item)) {
        ++backlogged;
        queue.push(item);
      }
    }
    std::this_thread::sleep_until(start + period * static_cast<std::int64_t>(rows));
    queue.close();
  });

  RunResult result{Trace(trace.labels()), {}, {}};
  result.filtered.reserve(rows);
  result.commands.resize(rows);
  std::vector<double> latencies;
  latencies.reserve(rows);
  std::vector<double> out(filter.size());
  const auto data = trace.data();
  const std::size_t n = trace.channels();
  try {
    while (const auto item = queue.pop(2 * period)) {
      const std::size_t r = item->row;
      step_and_command(filter, data.subspan(r * n, n), out, r, options, result.commands[r]);
      latencies.push_back(elapsed_ms(item->at, Clock::now()));
      result.filtered.push_back(trace.t_ms(r), out);
    }
  } catch (...) {
    // drain so the producer can finish, then rethrow
    while (queue.pop()) {
    }
    throw;
  }
  producer.join();
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  result.report = summarize_latencies(std::move(latencies), options.budget_ms, wall);
  result.report.backlogged = backlogged;
  return result;
}

std::vector<SmoothnessMetric> smoothness_metrics(const Trace& raw, const Trace& filtered, std::size_t burn_in) {
  if (raw.channels() != filtered.channels() || raw.rows() != filtered.rows()) {
    throw ShapeError("raw and filtered traces differ in shape");
  }
  if (raw.rows() < burn_in + 2) {
    throw InsufficientDataError("smoothness metrics need at least 2 rows after burn-in");
  }
  const auto keep = static_cast<Eigen::Index>(raw.rows() - burn_in);
  std::vector<SmoothnessMetric> metrics(raw.channels());
  for (std::size_t c = 0; c < raw.channels(); ++c) {
    auto& m = metrics[c];
    const auto r = raw.column(c).tail(keep);
    const auto f = filtered.column(c).tail(keep);
    const Eigen::VectorXd dr = r.tail(keep - 1) - r.head(keep - 1);
    const Eigen::VectorXd df = f.tail(keep - 1) - f.head(keep - 1);
    const auto var = [](const Eigen::VectorXd& d) {
      if (d.size() < 2) return 0.0;
      return (d.array() - d.mean()).square().sum() / static_cast<double>(d.size() - 1);
    };
    m.raw_diff_var = var(dr);
    m.filtered_diff_var = var(df);
    if (m.raw_diff_var > 0) {
      m.ratio = m.filtered_diff_var / m.raw_diff_var;
    } else {
      m.ratio = m.filtered_diff_var > 0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
  }
  return metrics;
}

std::uint64_t checksum(const Trace& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= bits & 0xffU;
      h *= 0x100000001b3ULL;
      bits >>= 8;
    }
  };
  for (const double t : trace.timestamps()) mix(t);
  for (const double v : trace.data()) mix(v);
  return h;
}

}  // namespace jointkf
