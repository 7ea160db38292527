#include <filesystem>

#include <doctest.h>

#include "jointkf/errors.hpp"
#include "jointkf/pipeline.hpp"
#include "jointkf/trace.hpp"

using namespace jointkf;

TEST_CASE("parse a small trace") {
  const Trace t = parse_trace("t_ms,ch0,ch1:index_pip\n0,1.5,2\n1,-3e2,4.25\n");
  CHECK(t.rows() == 2);
  CHECK(t.channels() == 2);
  CHECK(t.labels() == std::vector<std::string>{"ch0", "index_pip"});
  CHECK(t.at(1, 0) == -300.0);
  CHECK(t.column(1)[1] == 4.25);
  CHECK(t.sample(0).values == std::vector<double>{1.5, 2.0});
}

TEST_CASE("parse errors name the line") {
  std::string text = "t_ms";
  for (int c = 0; c < 18; ++c) text += ",ch" + std::to_string(c);
  text += "\n0";
  for (int c = 0; c < 18; ++c) text += ",1";
  text += "\n1";
  for (int c = 0; c < 17; ++c) text += ",1";
  text += "\n";
  try {
    parse_trace(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_trace("t_ms,ch0\n0,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_trace("t_ms,ch0\n0,nan\n"), ParseError);
  CHECK_THROWS_AS(parse_trace("t_ms,ch0\n0,1\n0,2\n"), ParseError);
  CHECK_THROWS_AS(parse_trace("t_ms,ch0\n1,1\n0,2\n"), ParseError);
  CHECK_THROWS_AS(parse_trace("time,ch0\n"), ParseError);
  CHECK_THROWS_AS(parse_trace("t_ms,ch1\n"), ParseError);
  CHECK_THROWS_AS(parse_trace(""), ParseError);
}

TEST_CASE("header-only trace has zero rows") {
  const Trace t = parse_trace("t_ms,ch0,ch1\n");
  CHECK(t.rows() == 0);
  CHECK(t.channels() == 2);
}

TEST_CASE("push_back enforces width and ordering") {
  Trace t(2);
  t.push_back(0.0, std::vector<double>{1, 2});
  CHECK_THROWS_AS(t.push_back(1.0, std::vector<double>{1}), ShapeError);
  CHECK_THROWS_AS(t.push_back(0.0, std::vector<double>{1, 2}), ParameterError);
}

TEST_CASE("write then read is lossless at 9 significant digits") {
  // property: format is a fixed point after one write/read pass
  std::vector<double> r(5, 21.18);
  const auto sim = simulate_sensor(SinusoidTrajectory{512.0, 100.0, 333.0}, r, 11, 1000);
  const Trace once = parse_trace(format_trace(sim.noisy));
  const auto path = std::filesystem::temp_directory_path() / "jointkf_trace_roundtrip.csv";
  write_trace(once, path);
  const Trace twice = read_trace(path);
  CHECK(twice == once);
  double worst = 0;
  for (std::size_t i = 0; i < once.data().size(); ++i) {
    worst = std::max(worst, std::abs(once.data()[i] - sim.noisy.data()[i]) / std::abs(sim.noisy.data()[i]));
  }
  CHECK(worst <= 5e-9);
  std::filesystem::remove(path);

  Trace labelled(std::vector<std::string>{"thumb", "ch1"});
  labelled.push_back(0.5, std::vector<double>{1, 2});
  CHECK(format_trace(labelled).substr(0, 22) == "t_ms,ch0:thumb,ch1\n0.5");
  CHECK(parse_trace(format_trace(labelled)) == labelled);
}

TEST_CASE("format_number") {
  CHECK(format_number(21.18) == "21.18");
  CHECK(format_number(0.1 + 0.2, 9) == "0.3");
  CHECK(format_number(123456789.0, 9) == "123456789");
}

TEST_CASE("missing trace file") {
  CHECK_THROWS_AS(read_trace("/nonexistent/trace.csv"), ParameterError);
}
