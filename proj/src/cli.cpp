#include "jointkf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jointkf/calibration.hpp"
#include "jointkf/errors.hpp"
#include "jointkf/filter_core.hpp"
#include "jointkf/noise.hpp"
#include "jointkf/pipeline.hpp"

namespace jointkf::cli {

namespace fs = std::filesystem;

namespace {

struct FilterArgs {
  std::string input, output, config, mode = "offline";
  std::optional<double> rate_hz, budget_ms;
};

struct SimulateArgs {
  std::string output, clean_output, config, trajectory = "constant";
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  std::optional<std::size_t> channels;
  std::optional<double> noise_var;
  double value = 0.0, amplitude = 0.0, period = 1000.0, step_std = 1.0, lower = -1000.0, upper = 1000.0;
  std::optional<double> rate_hz;
};

struct CalibrateArgs {
  std::string input, output, config;
  bool detrend = false;
};

struct NoiseArgs {
  std::string method = "box-muller", output;
  std::size_t count = 0, bins = 20;
  std::uint64_t seed = 0;
  int rows = 64;
  double mean = 0.0, stddev = 1.0, range_min = -4.0, range_max = 4.0;
};

struct BenchArgs {
  std::size_t channels = 18, rows = 94096;
  std::uint64_t seed = 0;
  double budget_ms = 1.0;
  std::string output;
};

struct SteadyStateArgs {
  std::string config, output;
  double tol = 1e-10;
  int max_iter = 10000;
};

fs::path sibling(const fs::path& output, const std::string& suffix) {
  fs::path p = output;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

void require_writable_parent(const fs::path& path, const std::string& flag) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw ParameterError(flag + ": directory '" + parent.string() + "' does not exist");
  }
}

SystemConfig config_or_default(const std::string& path) {
  return path.empty() ? default_config_18() : load_config(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParameterError("cannot write '" + path.string() + "'");
  out << text;
}

std::string format_commands(const Trace& filtered, const std::vector<MotorCommand>& commands) {
  std::string out = "t_ms";
  for (std::size_t c = 0; c < filtered.channels(); ++c) out += "," + default_label(c);
  out += '\n';
  for (std::size_t r = 0; r < commands.size(); ++r) {
    out += format_number(filtered.t_ms(r), 9);
    for (const auto v : commands[r].values) out += "," + std::to_string(v);
    out += '\n';
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

int cmd_filter(const FilterArgs& a, std::ostream& err) {
  require_writable_parent(a.output, "--output");
  const SystemConfig cfg = config_or_default(a.config);
  const Trace trace = read_trace(a.input);
  if (trace.channels() != cfg.size()) {
    throw ShapeError("trace has " + std::to_string(trace.channels()) + " channels, config has " +
                     std::to_string(cfg.size()));
  }
  auto filter = make_filter(cfg);
  RunOptions options;
  options.budget_ms = a.budget_ms.value_or(cfg.step_budget_ms);
  RunResult result;
  if (a.mode == "offline") {
    result = run_offline(trace, filter, options);
  } else {
    result = run_realtime(trace, filter, a.rate_hz.value_or(cfg.sample_rate_hz), options);
  }

  write_trace(result.filtered, a.output);
  write_text(sibling(a.output, ".commands.csv"), format_commands(result.filtered, result.commands));

  nlohmann::ordered_json report = nlohmann::ordered_json::parse(format_report(result.report));
  report["mode"] = a.mode;
  if (trace.rows() >= 2) {
    nlohmann::ordered_json smooth = nlohmann::ordered_json::array();
    const auto metrics = smoothness_metrics(trace, result.filtered);
    for (std::size_t c = 0; c < metrics.size(); ++c) {
      smooth.push_back({{"channel", c},
                        {"raw_diff_var", metrics[c].raw_diff_var},
                        {"filtered_diff_var", metrics[c].filtered_diff_var},
                        {"ratio", metrics[c].ratio}});
      err << "channel " << c << " smoothness ratio " << metrics[c].ratio << "\n";
    }
    report["smoothness"] = std::move(smooth);
  }
  write_text(sibling(a.output, ".report.json"), report.dump(2) + "\n");
  err << "filtered " << result.report.samples_processed << " samples (" << a.mode
      << "), violations " << result.report.violations << ", p99 " << result.report.p99_ms << " ms\n";
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& err) {
  require_writable_parent(a.output, "--output");
  const fs::path clean_path = a.clean_output.empty() ? sibling(a.output, ".clean.csv") : fs::path(a.clean_output);
  require_writable_parent(clean_path, "--clean-output");

  const SystemConfig cfg = config_or_default(a.config);
  const std::size_t channels = a.channels.value_or(cfg.size());
  if (channels < 1) throw ParameterError("--channels must be >= 1");
  std::vector<double> noise(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    if (a.noise_var) {
      noise[c] = *a.noise_var;
    } else if (c < cfg.size()) {
      noise[c] = cfg.channels[c].r_var;
    } else {
      throw ParameterError("--channels exceeds the config's " + std::to_string(cfg.size()) +
                           " channels; pass --noise-var");
    }
  }
  TrajectorySpec spec;
  if (a.trajectory == "constant") {
    spec = ConstantTrajectory{a.value};
  } else if (a.trajectory == "sinusoid") {
    spec = SinusoidTrajectory{a.value, a.amplitude, a.period};
  } else {
    spec = RandomWalkTrajectory{a.value, a.step_std, a.lower, a.upper};
  }
  const auto sim = simulate_sensor(spec, noise, a.seed, a.rows, a.rate_hz.value_or(cfg.sample_rate_hz));
  write_trace(sim.noisy, a.output);
  write_trace(sim.clean, clean_path);
  err << "simulated " << a.rows << " rows x " << channels << " channels\n";
  return kOk;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& err) {
  require_writable_parent(a.output, "--output");
  const Trace trace = read_trace(a.input);
  const SystemConfig base = a.config.empty() ? config_from_variances(std::vector<double>(trace.channels(), 1.0))
                                             : load_config(a.config);
  if (!a.config.empty() && base.size() != trace.channels()) {
    throw ShapeError("trace has " + std::to_string(trace.channels()) + " channels, config has " +
                     std::to_string(base.size()));
  }
  const SystemConfig cfg = calibrated_config(trace, a.detrend, base);
  for (const auto& ch : cfg.channels) {
    if (ch.r_var <= kVarianceFloor) {
      err << "warning: channel " << ch.channel_index << " has zero variance; r_var floored at "
          << kVarianceFloor << "\n";
    }
  }
  save_config(cfg, a.output);
  err << "calibrated " << cfg.size() << " channels from " << trace.rows() << " rows\n";
  return kOk;
}

int cmd_noise(const NoiseArgs& a, std::ostream& err) {
  require_writable_parent(a.output, "--output");
  UniformSource source(a.seed);
  Eigen::VectorXd samples;
  if (a.method == "box-muller") {
    samples = gaussian_stream(source, a.count, a.mean, a.stddev);
  } else {
    const GaltonConfig cfg{a.rows};
    samples.resize(static_cast<Eigen::Index>(a.count));
    for (auto& s : samples) s = a.mean + a.stddev * galton_standardized(source, cfg);
  }
  std::string text = "sample\n";
  for (const double s : samples) text += format_number(s) + "\n";
  write_text(a.output, text);

  const Histogram h = histogram(samples, a.bins, a.range_min, a.range_max);
  std::string hist = "bin_lo,bin_hi,count\n";
  hist += "-inf," + format_number(h.lo) + "," + std::to_string(h.underflow) + "\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double lo = h.lo + static_cast<double>(i) * h.bin_width();
    hist += format_number(lo) + "," + format_number(lo + h.bin_width()) + "," + std::to_string(h.counts[i]) + "\n";
  }
  hist += format_number(h.hi) + ",inf," + std::to_string(h.overflow) + "\n";
  write_text(sibling(a.output, ".hist.csv"), hist);

  nlohmann::ordered_json stats;
  stats["method"] = a.method;
  stats["seed"] = a.seed;
  stats["count"] = a.count;
  if (a.count >= 2) {
    const SampleStats s = normality_stats(samples);
    stats["mean"] = s.mean;
    stats["variance"] = s.variance;
    stats["skewness"] = s.skewness;
    stats["excess_kurtosis"] = s.excess_kurtosis;
  }
  write_text(sibling(a.output, ".stats.json"), stats.dump(2) + "\n");
  err << "generated " << a.count << " " << a.method << " samples\n";
  return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& err) {
  if (!a.output.empty()) require_writable_parent(a.output, "--output");
  if (a.channels < 1) throw ParameterError("--channels must be >= 1");
  std::vector<double> noise(a.channels);
  for (std::size_t c = 0; c < a.channels; ++c) noise[c] = kGloveRVariances[c % std::size(kGloveRVariances)];

  RunResult result;
  Trace trace(a.channels);
  if (a.rows > 0) {
    trace = simulate_sensor(ConstantTrajectory{512.0}, noise, a.seed, a.rows).noisy;
  }
  auto filter = make_filter(config_from_variances(noise));
  RunOptions options;
  options.budget_ms = a.budget_ms;
  result = run_offline(trace, filter, options);

  nlohmann::ordered_json report = nlohmann::ordered_json::parse(format_report(result.report));
  report["channels"] = a.channels;
  report["rows"] = a.rows;
  report["seed"] = a.seed;
  report["filtered_checksum"] = hex64(checksum(result.filtered));
  if (!a.output.empty()) write_text(a.output, report.dump(2) + "\n");
  err << "bench " << a.rows << " x " << a.channels << ": throughput " << result.report.throughput_sps
      << " samples/s, p99 " << result.report.p99_ms << " ms, max " << result.report.max_ms << " ms, violations "
      << result.report.violations << ", checksum " << hex64(checksum(result.filtered)) << "\n";
  return kOk;
}

int cmd_steady_state(const SteadyStateArgs& a, std::ostream& err) {
  require_writable_parent(a.output, "--output");
  const SystemConfig cfg = config_or_default(a.config);
  validate(cfg);
  std::string table = "channel,r_var,q_scale,k0,k1,p00,p01,p11,iterations\n";
  for (const auto& ch : cfg.channels) {
    const auto noise = NoiseModel<double>::scaled_identity(ch.q_scale, ch.r_var);
    const auto ss = steady_state(KinematicModel<double>{}, noise, a.tol, a.max_iter);
    table += std::to_string(ch.channel_index) + "," + format_number(ch.r_var) + "," + format_number(ch.q_scale) +
             "," + format_number(ss.gain(0)) + "," + format_number(ss.gain(1)) + "," +
             format_number(ss.p_prior(0, 0)) + "," + format_number(ss.p_prior(0, 1)) + "," +
             format_number(ss.p_prior(1, 1)) + "," + std::to_string(ss.iterations) + "\n";
  }
  write_text(a.output, table);
  err << "steady state for " << cfg.size() << " channels\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Multi-channel Kalman filtering for joint-angle sensor streams", "jointkf"};
  app.require_subcommand(1);

  FilterArgs filter;
  auto* f = app.add_subcommand("filter", "Filter a trace file through the per-channel filter bank");
  f->add_option("--input", filter.input, "Input trace")->required()->check(CLI::ExistingFile);
  f->add_option("--output", filter.output, "Filtered trace")->required();
  f->add_option("--config", filter.config, "Config file (default: 18-channel glove config)")->check(CLI::ExistingFile);
  f->add_option("--mode", filter.mode, "offline or realtime")->check(CLI::IsMember({"offline", "realtime"}));
  f->add_option("--rate-hz", filter.rate_hz, "Release rate in realtime mode")->check(CLI::PositiveNumber);
  f->add_option("--budget-ms", filter.budget_ms, "Per-step latency budget")->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Write a synthetic noisy trace and its clean reference");
  s->add_option("--output", sim.output, "Noisy trace")->required();
  s->add_option("--clean-output", sim.clean_output, "Clean trace (default: <output>.clean.csv)");
  s->add_option("--seed", sim.seed, "Random seed")->required();
  s->add_option("--rows", sim.rows, "Row count")->required();
  s->add_option("--channels", sim.channels, "Channel count (default: config channel count)");
  s->add_option("--config", sim.config, "Config whose r_var sets the noise")->check(CLI::ExistingFile);
  s->add_option("--noise-var", sim.noise_var, "Noise variance for every channel")->check(CLI::NonNegativeNumber);
  s->add_option("--trajectory", sim.trajectory, "constant, sinusoid or random-walk")
      ->check(CLI::IsMember({"constant", "sinusoid", "random-walk"}));
  s->add_option("--value", sim.value, "Constant value, sinusoid offset or walk start");
  s->add_option("--amplitude", sim.amplitude, "Sinusoid amplitude");
  s->add_option("--period", sim.period, "Sinusoid period in rows");
  s->add_option("--step-std", sim.step_std, "Random-walk step stddev");
  s->add_option("--lower", sim.lower, "Random-walk lower bound");
  s->add_option("--upper", sim.upper, "Random-walk upper bound");
  s->add_option("--rate-hz", sim.rate_hz, "Sample rate for timestamps")->check(CLI::PositiveNumber);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Estimate per-channel r_var from a stationary capture");
  c->add_option("--input", cal.input, "Stationary trace")->required()->check(CLI::ExistingFile);
  c->add_option("--output", cal.output, "Config to write")->required();
  c->add_option("--config", cal.config, "Base config for the other fields")->check(CLI::ExistingFile);
  c->add_flag("--detrend", cal.detrend, "Use first differences to remove slow drift");

  NoiseArgs noise;
  auto* n = app.add_subcommand("noise", "Generate Gaussian samples, histogram and moments");
  n->add_option("--method", noise.method, "box-muller or galton")->check(CLI::IsMember({"box-muller", "galton"}));
  n->add_option("--count", noise.count, "Sample count")->required();
  n->add_option("--seed", noise.seed, "Random seed")->required();
  n->add_option("--rows", noise.rows, "Galton pin rows")->check(CLI::PositiveNumber);
  n->add_option("--output", noise.output, "Samples file")->required();
  n->add_option("--bins", noise.bins, "Histogram bins")->check(CLI::PositiveNumber);
  n->add_option("--range-min", noise.range_min, "Histogram lower edge");
  n->add_option("--range-max", noise.range_max, "Histogram upper edge");
  n->add_option("--mean", noise.mean, "Output mean");
  n->add_option("--std", noise.stddev, "Output standard deviation");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time the filter bank on a synthetic trace");
  b->add_option("--channels", bench.channels, "Channel count");
  b->add_option("--rows", bench.rows, "Row count");
  b->add_option("--seed", bench.seed, "Random seed")->required();
  b->add_option("--budget-ms", bench.budget_ms, "Per-step latency budget")->check(CLI::NonNegativeNumber);
  b->add_option("--output", bench.output, "Report file");

  SteadyStateArgs ss;
  auto* st = app.add_subcommand("steady-state", "Converged gain and covariance per channel");
  st->add_option("--config", ss.config, "Config file (default: 18-channel glove config)")->check(CLI::ExistingFile);
  st->add_option("--output", ss.output, "Table to write")->required();
  st->add_option("--tol", ss.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  st->add_option("--max-iter", ss.max_iter, "Iteration cap")->check(CLI::PositiveNumber);

  // CLI11 consumes a vector in reverse order, without the program name
  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      err << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kUserError;
  }

  try {
    if (f->parsed()) return cmd_filter(filter, err);
    if (s->parsed()) return cmd_simulate(sim, err);
    if (c->parsed()) return cmd_calibrate(cal, err);
    if (n->parsed()) return cmd_noise(noise, err);
    if (b->parsed()) return cmd_bench(bench, err);
    if (st->parsed()) return cmd_steady_state(ss, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace jointkf::cli
