#include "jointkf/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "jointkf/errors.hpp"

namespace jointkf {

namespace {

constexpr int kTraceDigits = 9;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(line_no, "column " + std::to_string(column) + ": '" + std::string(cell) +
                                  "' is not a number");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line_no, "column " + std::to_string(column) + ": value is not finite");
  }
  return value;
}

std::vector<std::string> parse_header(std::string_view line) {
  const auto cells = split_commas(line);
  if (cells.empty() || cells[0] != "t_ms") {
    throw ParseError(1, "header must start with 't_ms'");
  }
  std::vector<std::string> labels;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const std::string expected = default_label(i - 1);
    std::string_view cell = cells[i];
    std::string_view name = cell.substr(0, cell.find(':'));
    if (name != expected) {
      throw ParseError(1, "header column " + std::to_string(i) + " must be '" + expected + "'");
    }
    if (name.size() < cell.size()) {
      std::string_view label = cell.substr(name.size() + 1);
      if (label.empty()) {
        throw ParseError(1, "empty label after ':' in header column " + std::to_string(i));
      }
      labels.emplace_back(label);
    } else {
      labels.push_back(expected);
    }
  }
  return labels;
}

}  // namespace

std::string default_label(std::size_t channel) { return "ch" + std::to_string(channel); }

Trace::Trace(std::size_t channels) {
  labels_.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) labels_.push_back(default_label(c));
}

Trace::Trace(std::vector<std::string> labels) : labels_(std::move(labels)) {}

Sample Trace::sample(std::size_t r) const {
  const auto first = values_.begin() + static_cast<std::ptrdiff_t>(r * channels());
  return Sample{t_ms_[r], std::vector<double>(first, first + static_cast<std::ptrdiff_t>(channels()))};
}

void Trace::push_back(double t_ms, std::span<const double> values) {
  if (values.size() != channels()) {
    throw ShapeError("row has " + std::to_string(values.size()) + " values, trace has " +
                     std::to_string(channels()) + " channels");
  }
  if (!t_ms_.empty() && !(t_ms > t_ms_.back())) {
    throw ParameterError("timestamps must be strictly increasing");
  }
  t_ms_.push_back(t_ms);
  values_.insert(values_.end(), values.begin(), values.end());
}

void Trace::reserve(std::size_t rows) {
  t_ms_.reserve(rows);
  values_.reserve(rows * channels());
}

std::string format_number(double value, int digits) {
  char buf[64];
  const auto result = digits > 0
                          ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits)
                          : std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

Trace parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(1, "missing header");
  }
  Trace trace(parse_header(line));
  const std::size_t n = trace.channels();
  std::vector<double> row(n);
  std::size_t line_no = 1;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != n + 1) {
      throw ParseError(line_no, "expected " + std::to_string(n + 1) + " columns, found " +
                                    std::to_string(cells.size()));
    }
    const double t = parse_cell(cells[0], line_no, 0);
    if (!trace.empty() && !(t > last_t)) {
      throw ParseError(line_no, "timestamp " + std::string(cells[0]) + " is not increasing");
    }
    for (std::size_t c = 0; c < n; ++c) row[c] = parse_cell(cells[c + 1], line_no, c + 1);
    trace.push_back(t, row);
    last_t = t;
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParameterError("cannot open trace file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_trace(buffer.str());
}

std::string format_trace(const Trace& trace) {
  std::string out = "t_ms";
  for (std::size_t c = 0; c < trace.channels(); ++c) {
    const std::string name = default_label(c);
    out += ',';
    out += name;
    if (trace.labels()[c] != name) {
      out += ':';
      out += trace.labels()[c];
    }
  }
  out += '\n';
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    out += format_number(trace.t_ms(r), kTraceDigits);
    for (std::size_t c = 0; c < trace.channels(); ++c) {
      out += ',';
      out += format_number(trace.at(r, c), kTraceDigits);
    }
    out += '\n';
  }
  return out;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ParameterError("cannot write trace file '" + path.string() + "'");
  }
  out << format_trace(trace);
}

}  // namespace jointkf
