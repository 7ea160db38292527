// Timestamped multi-channel measurement rows and their CSV representation.
//
// File format:
//
//   t_ms,ch0,ch1:index_pip,...
//   0,512.25,498
//   1,511.75,497.5
//
// Header column i (after t_ms) must be named `ch<i>`, optionally followed by
// `:<label>`. Values are written with 9 significant digits.
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace jointkf {

struct Sample {
  double t_ms = 0.0;
  std::vector<double> values;
};

/// Row-major storage; row() and column() are Eigen views into it.
class Trace {
 public:
  using RowView = Eigen::Map<const Eigen::RowVectorXd>;
  using ColumnView = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

  Trace() = default;
  explicit Trace(std::size_t channels);
  explicit Trace(std::vector<std::string> labels);

  std::size_t channels() const noexcept { return labels_.size(); }
  std::size_t rows() const noexcept { return t_ms_.size(); }
  bool empty() const noexcept { return t_ms_.empty(); }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& timestamps() const noexcept { return t_ms_; }
  std::span<const double> data() const noexcept { return values_; }

  double t_ms(std::size_t row) const { return t_ms_[row]; }
  double at(std::size_t row, std::size_t channel) const {
    return values_[row * channels() + channel];
  }
  RowView row(std::size_t r) const {
    return RowView(values_.data() + r * channels(), static_cast<Eigen::Index>(channels()));
  }
  ColumnView column(std::size_t c) const {
    return ColumnView(values_.data() + c, static_cast<Eigen::Index>(rows()),
                      Eigen::InnerStride<>(static_cast<Eigen::Index>(channels())));
  }
  Sample sample(std::size_t r) const;

  /// Appends a row. Throws ShapeError on a width mismatch and ParameterError
  /// when t_ms does not strictly increase. Values are not checked for
  /// finiteness here so that programmatic traces can carry dropouts.
  void push_back(double t_ms, std::span<const double> values);
  void push_back(const Sample& s) { push_back(s.t_ms, s.values); }
  void reserve(std::size_t rows);

  bool operator==(const Trace&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<double> t_ms_;
  std::vector<double> values_;
};

/// Default label for column i ("ch<i>").
std::string default_label(std::size_t channel);

/// Throws ParseError naming the line for ragged rows, non-numeric or
/// non-finite cells, and non-increasing timestamps.
Trace read_trace(const std::filesystem::path& path);
Trace parse_trace(const std::string& text);

void write_trace(const Trace& trace, const std::filesystem::path& path);
std::string format_trace(const Trace& trace);

/// Shortest decimal that round-trips, or `digits` significant digits when > 0.
std::string format_number(double value, int digits = 0);

}  // namespace jointkf
