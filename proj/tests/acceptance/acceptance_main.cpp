// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jointkf/calibration.hpp"
#include "jointkf/cli.hpp"
#include "jointkf/filter_core.hpp"
#include "jointkf/multi_channel.hpp"
#include "jointkf/noise.hpp"
#include "jointkf/pipeline.hpp"
#include "jointkf/trace.hpp"
#include "oracles/reference_kalman.hpp"

using namespace jointkf;
namespace fs = std::filesystem;

namespace {

const fs::path kData = JOINTKF_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> glove_r() { return {std::begin(kGloveRVariances), std::end(kGloveRVariances)}; }

std::string num(double v) { return format_number(v, 6); }

double ulp(double x) {
  x = std::abs(x);
  return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args, std::string& err_text) {
  args.insert(args.begin(), "jointkf");
  std::ostringstream err;
  const int code = cli::run(args, err);
  err_text = err.str();
  return code;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("jointkf_acceptance_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Outcome paper_r_defaults() {
  static const char* const kPaper[18] = {"21.18", "12.52", "10.62", "9.86",  "26.94", "10.08",
                                         "9.71",  "17.58", "6.05",  "9.91",  "47.19", "11.04",
                                         "7.56",  "23.94", "26.82", "28.82", "27.69", "31.49"};
  const auto cfg = default_config_18();
  if (cfg.size() != 18) return {false, std::to_string(cfg.size()) + " channels"};
  int mismatches = 0;
  std::string first;
  for (std::size_t i = 0; i < 18; ++i) {
    const auto text = format_number(cfg.channels[i].r_var);
    if (text != kPaper[i]) {
      if (mismatches++ == 0) first = "channel " + std::to_string(i) + ": " + text + " != " + kPaper[i];
    }
  }
  return {mismatches == 0, mismatches == 0 ? "18/18 entries equal" : first};
}

Outcome kalman_oracle() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_r(std::log(1e-3), std::log(1e3));
  const KinematicModel<double> model;
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    FilterState<double> s;
    s.x_hat << 100 * unit(rng), 10 * unit(rng);
    Covariance<double> l;
    l << unit(rng), 0, unit(rng), unit(rng);
    s.p = 100 * l * l.transpose();
    Covariance<double> ql;
    ql << unit(rng), 0, unit(rng), unit(rng);
    const Covariance<double> q = ql * ql.transpose() + 1e-3 * Covariance<double>::Identity();
    const double r = std::exp(log_r(rng));
    const double u = 10 * unit(rng);
    const double z = 100 * unit(rng);
    const NoiseModel<double> noise{q, r};

    const auto prior = predict(s, model, noise, u);
    const auto k = gain(prior.p, model, noise);
    const auto post = update(prior, z, model, noise);

    const oracle::State2 rs{s.x_hat(0), s.x_hat(1), s.p(0, 0), s.p(0, 1), s.p(1, 0), s.p(1, 1)};
    const oracle::Noise2 rn{q(0, 0), q(0, 1), q(1, 0), q(1, 1), r};
    const auto rprior = oracle::reference_predict(rs, {}, rn, u);
    double k0 = 0, k1 = 0;
    oracle::reference_gain(rprior, {}, rn, k0, k1);
    const auto rpost = oracle::reference_update(rprior, {}, rn, z);

    const double diffs[] = {prior.x(0) - rprior.x0,  prior.x(1) - rprior.x1,  prior.p(0, 0) - rprior.p00,
                            prior.p(0, 1) - rprior.p01, prior.p(1, 0) - rprior.p10, prior.p(1, 1) - rprior.p11,
                            k(0) - k0,                 k(1) - k1,                 post.x_hat(0) - rpost.x0,
                            post.x_hat(1) - rpost.x1,  post.p(0, 0) - rpost.p00,  post.p(0, 1) - rpost.p01,
                            post.p(1, 0) - rpost.p10,  post.p(1, 1) - rpost.p11};
    for (const double d : diffs) worst = std::max(worst, std::abs(d));
  }
  return {worst <= 1e-10, "10000 steps, max abs diff " + num(worst)};
}

Outcome block_equivalence() {
  const auto r = glove_r();
  const auto sim = simulate_sensor(RandomWalkTrajectory{300.0, 2.0, 0.0, 1023.0}, r, 303, 10000);
  auto joint = make_filter(default_config_18());
  const auto together = filter_trace(sim.noisy, joint).filtered;
  double worst = 0;
  for (std::size_t c = 0; c < 18; ++c) {
    Trace single(1);
    single.reserve(sim.noisy.rows());
    for (std::size_t row = 0; row < sim.noisy.rows(); ++row) {
      single.push_back(sim.noisy.t_ms(row), std::vector<double>{sim.noisy.at(row, c)});
    }
    auto one = make_filter(config_from_variances({r[c]}));
    const auto alone = filter_trace(single, one).filtered;
    worst = std::max(worst, (together.column(c) - alone.column(0)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9, "18 x 10000, max abs diff " + num(worst)};
}

Outcome riccati_fixed_point() {
  const KinematicModel<double> model;
  double worst = 0;
  for (const double r : kGloveRVariances) {
    const NoiseModel<double> noise{Covariance<double>::Identity(), r};
    const auto ss = steady_state(model, noise);
    auto s = init_filter(0.0);
    for (int k = 0; k < 50000; ++k) s = step(s, model, noise, 0.0);
    worst = std::max(worst, (ss.gain - s.k_gain).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "18 r values, max gain diff " + num(worst)};
}

Outcome smoothing_claim() {
  const auto sim = simulate_sensor(ConstantTrajectory{512.0}, glove_r(), 4, 100000);
  auto filter = make_filter(default_config_18());
  const auto out = run_offline(sim.noisy, filter);
  const auto metrics = smoothness_metrics(sim.noisy, out.filtered, 500);
  std::string failing;
  double worst = 0;
  for (std::size_t c = 0; c < metrics.size(); ++c) {
    worst = std::max(worst, metrics[c].ratio);
    if (!(metrics[c].ratio < 0.25)) {
      failing += (failing.empty() ? "" : ", ") + ("ch" + std::to_string(c) + " (r=" + num(kGloveRVariances[c]) +
                                                  ") ratio " + num(metrics[c].ratio));
    }
  }
  if (failing.empty()) return {true, "18/18 ratios < 0.25, worst " + num(worst)};
  return {false, "ratio >= 0.25: " + failing};
}

Outcome realtime_contract() {
  TempDir dir;
  const auto out = (dir.path / "bench.json").string();
  std::string err;
  const int code = run_cli({"bench", "--channels", "18", "--rows", "94096", "--seed", "1", "--output", out}, err);
  if (code != 0) return {false, "bench exited " + std::to_string(code) + ": " + err};
  const auto report = nlohmann::json::parse(slurp(out));
  const double sps = report["throughput_sps"].get<double>();
  const double p99 = report["p99_ms"].get<double>();
  return {sps >= 1000.0 && p99 <= 1.0, "throughput " + num(sps) + " samples/s, p99 " + num(p99) + " ms"};
}

Outcome box_muller_stats() {
  UniformSource source(7);
  const auto samples = gaussian_stream(source, 1000000);
  const auto st = normality_stats(samples);
  UniformSource pairs(8);
  double worst_ulps = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u1 = pairs(), u2 = pairs();
    const auto [z0, z1] = box_muller_pair(u1, u2);
    const double expected = -2.0 * std::log(u1);
    if (expected == 0.0) continue;
    worst_ulps = std::max(worst_ulps, std::abs(z0 * z0 + z1 * z1 - expected) / ulp(expected));
  }
  const bool ok = std::abs(st.mean) < 0.005 && std::abs(st.variance - 1.0) < 0.01 && worst_ulps <= 4.0;
  return {ok, "mean " + num(st.mean) + ", variance " + num(st.variance) + ", circle identity worst " +
                  num(worst_ulps) + " ulps"};
}

Outcome galton_stats() {
  UniformSource source(9);
  const GaltonConfig two{2};
  double counts[3] = {0, 0, 0};
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) counts[galton_sample(source, two)] += 1;
  const double expected[3] = {0.25, 0.5, 0.25};
  double worst_freq = 0;
  for (int b = 0; b < 3; ++b) worst_freq = std::max(worst_freq, std::abs(counts[b] / draws - expected[b]));

  const GaltonConfig wide{64};
  Eigen::VectorXd z(100000);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = galton_standardized(source, wide);
  const auto st = normality_stats(z);
  const bool ok = worst_freq < 0.005 && std::abs(st.mean) < 0.02 && std::abs(st.variance - 1.0) < 0.05;
  return {ok, "rows=2 worst freq err " + num(worst_freq) + "; rows=64 mean " + num(st.mean) + ", variance " +
                  num(st.variance)};
}

Outcome calibration_round_trip() {
  const auto r = glove_r();
  const auto sim = simulate_sensor(ConstantTrajectory{512.0}, r, 11, 100000);
  const auto est = estimate_r(sim.noisy);
  double worst = 0;
  for (std::size_t c = 0; c < r.size(); ++c) worst = std::max(worst, std::abs(est(c) / r[c] - 1.0));
  return {worst < 0.03, "18 channels x 100000 rows, worst relative error " + num(worst)};
}

Outcome determinism() {
  TempDir dir;
  std::vector<std::string> outputs;
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto out = (dir.path / name).string();
    std::string err;
    const int code = run_cli({"filter", "--input", (kData / "example_trace_6000.csv").string(), "--config",
                              (kData / "example_config_1ch.json").string(), "--output", out},
                             err);
    if (code != 0) return {false, "filter exited " + std::to_string(code) + ": " + err};
    outputs.push_back(slurp(out));
  }
  const bool ok = !outputs[0].empty() && outputs[0] == outputs[1];
  return {ok, std::to_string(outputs[0].size()) + " bytes, " + (ok ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"paper R defaults", paper_r_defaults},
      {"Kalman correctness oracle", kalman_oracle},
      {"block equals per-channel", block_equivalence},
      {"Riccati fixed point", riccati_fixed_point},
      {"smoothing claim", smoothing_claim},
      {"real-time contract", realtime_contract},
      {"Box-Muller statistics", box_muller_stats},
      {"Galton statistics", galton_stats},
      {"calibration round trip", calibration_round_trip},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << " [" << format_number(secs, 3) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
