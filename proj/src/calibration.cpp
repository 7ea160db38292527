#include "jointkf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jointkf/errors.hpp"

namespace jointkf {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ValidationError(where + key + ": unknown key");
    }
  }
}

double number_field(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw ValidationError(where + key + ": must be a number");
  }
  return v.get<double>();
}

double optional_number(const json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number_field(obj, key, where) : fallback;
}

double unbiased_variance(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

SystemConfig default_config_18() {
  return config_from_variances(std::vector<double>(std::begin(kGloveRVariances), std::end(kGloveRVariances)));
}

SystemConfig config_from_variances(const std::vector<double>& r_var) {
  SystemConfig cfg;
  cfg.channels.reserve(r_var.size());
  for (std::size_t i = 0; i < r_var.size(); ++i) {
    cfg.channels.push_back({i, r_var[i], default_label(i), 1.0});
  }
  return cfg;
}

void validate(const SystemConfig& cfg) {
  if (cfg.channels.empty()) {
    throw ValidationError("channels: at least one channel is required");
  }
  if (!(cfg.sample_rate_hz > 0) || !std::isfinite(cfg.sample_rate_hz)) {
    throw ValidationError("sample_rate_hz: must be > 0");
  }
  if (!(cfg.p0 >= 0) || !std::isfinite(cfg.p0)) {
    throw ValidationError("p0: must be >= 0");
  }
  if (!(cfg.step_budget_ms >= 0) || !std::isfinite(cfg.step_budget_ms)) {
    throw ValidationError("step_budget_ms: must be >= 0");
  }
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    const auto& ch = cfg.channels[i];
    const std::string where = "channels[" + std::to_string(i) + "].";
    if (ch.channel_index != i) {
      throw ValidationError(where + "index: expected " + std::to_string(i));
    }
    if (!(ch.r_var > 0) || !std::isfinite(ch.r_var)) {
      throw ValidationError(where + "r_var: must be > 0 (channel " + std::to_string(i) + ")");
    }
    if (!(ch.q_scale > 0) || !std::isfinite(ch.q_scale)) {
      throw ValidationError(where + "q_scale: must be > 0 (channel " + std::to_string(i) + ")");
    }
  }
}

Eigen::VectorXd estimate_r(const Trace& trace, bool detrend) {
  if (trace.rows() < 2) {
    throw InsufficientDataError("estimate_r needs at least 2 rows, got " + std::to_string(trace.rows()));
  }
  if (detrend && trace.rows() < 3) {
    throw InsufficientDataError("detrended estimate_r needs at least 3 rows");
  }
  const auto n = static_cast<Eigen::Index>(trace.rows());
  Eigen::VectorXd r(static_cast<Eigen::Index>(trace.channels()));
  for (std::size_t c = 0; c < trace.channels(); ++c) {
    const auto col = trace.column(c);
    double v;
    if (detrend) {
      const Eigen::VectorXd diff = col.tail(n - 1) - col.head(n - 1);
      v = unbiased_variance(diff) / 2.0;
    } else {
      v = unbiased_variance(col);
    }
    r[static_cast<Eigen::Index>(c)] = std::max(v, kVarianceFloor);
  }
  return r;
}

SystemConfig calibrated_config(const Trace& stationary, bool detrend, const SystemConfig& base) {
  const Eigen::VectorXd r = estimate_r(stationary, detrend);
  SystemConfig cfg = base;
  cfg.channels.resize(static_cast<std::size_t>(r.size()));
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    auto& ch = cfg.channels[i];
    if (i >= base.channels.size()) ch = {i, 1.0, stationary.labels()[i], 1.0};
    ch.r_var = r[static_cast<Eigen::Index>(i)];
  }
  return cfg;
}

SystemConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError("config root must be an object");
  }
  reject_unknown_keys(doc, {"version", "sample_rate_hz", "p0", "step_budget_ms", "channels"}, "");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != SystemConfig::kVersion) {
    throw ValidationError("version: must be " + std::to_string(SystemConfig::kVersion));
  }
  SystemConfig cfg;
  cfg.sample_rate_hz = optional_number(doc, "sample_rate_hz", cfg.sample_rate_hz, "");
  cfg.p0 = optional_number(doc, "p0", cfg.p0, "");
  cfg.step_budget_ms = optional_number(doc, "step_budget_ms", cfg.step_budget_ms, "");
  if (!doc.contains("channels") || !doc["channels"].is_array()) {
    throw ValidationError("channels: must be an array");
  }
  const auto& channels = doc["channels"];
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& entry = channels[i];
    const std::string where = "channels[" + std::to_string(i) + "].";
    if (!entry.is_object()) {
      throw ValidationError("channels[" + std::to_string(i) + "]: must be an object");
    }
    reject_unknown_keys(entry, {"index", "label", "r_var", "q_scale"}, where);
    ChannelCalibration ch;
    if (!entry.contains("index") || !entry["index"].is_number_unsigned()) {
      throw ValidationError(where + "index: must be a non-negative integer");
    }
    ch.channel_index = entry["index"].get<std::size_t>();
    if (!entry.contains("r_var")) {
      throw ValidationError(where + "r_var: missing");
    }
    ch.r_var = number_field(entry, "r_var", where);
    ch.q_scale = optional_number(entry, "q_scale", 1.0, where);
    if (entry.contains("label")) {
      if (!entry["label"].is_string()) {
        throw ValidationError(where + "label: must be a string");
      }
      ch.label = entry["label"].get<std::string>();
    } else {
      ch.label = default_label(i);
    }
    cfg.channels.push_back(std::move(ch));
  }
  validate(cfg);
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_config(const SystemConfig& cfg) {
  validate(cfg);
  json doc;
  doc["version"] = SystemConfig::kVersion;
  doc["sample_rate_hz"] = cfg.sample_rate_hz;
  doc["p0"] = cfg.p0;
  doc["step_budget_ms"] = cfg.step_budget_ms;
  json channels = json::array();
  for (const auto& ch : cfg.channels) {
    channels.push_back({{"index", ch.channel_index}, {"label", ch.label}, {"r_var", ch.r_var}, {"q_scale", ch.q_scale}});
  }
  doc["channels"] = std::move(channels);
  return doc.dump(2) + "\n";
}

void save_config(const SystemConfig& cfg, const std::filesystem::path& path) {
  const std::string text = format_config(cfg);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot write config '" + path.string() + "'");
  }
  out << text;
}

MultiChannelFilter<double> make_filter(const SystemConfig& cfg, MeasurementPolicy policy) {
  validate(cfg);
  KinematicModel<double> model;
  model.dt = 1.0 / cfg.sample_rate_hz;
  std::vector<NoiseModel<double>> noises;
  noises.reserve(cfg.size());
  for (const auto& ch : cfg.channels) noises.push_back(NoiseModel<double>::scaled_identity(ch.q_scale, ch.r_var));
  return MultiChannelFilter<double>::uniform(noises, model, cfg.p0, policy);
}

}  // namespace jointkf
