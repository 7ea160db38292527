#include <cmath>
#include <limits>

#include <doctest.h>

#include "jointkf/errors.hpp"
#include "jointkf/noise.hpp"

using namespace jointkf;

namespace {

double ulp(double x) {
  x = std::abs(x);
  return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

}  // namespace

TEST_CASE("uniform source range and determinism") {
  UniformSource a(42), b(42), c(43);
  bool same = true, differs = false, in_range = true;
  for (int i = 0; i < 100000; ++i) {
    const double x = a(), y = b(), w = c();
    same = same && x == y;
    differs = differs || x != w;
    in_range = in_range && x > 0.0 && x <= 1.0;
  }
  CHECK(same);
  CHECK(differs);
  CHECK(in_range);
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) == mix_seed(1, 0));
}

TEST_CASE("box_muller_pair") {
  SUBCASE("u1 = 1 gives the origin") {
    for (const double u2 : {0.0, 0.3, 1.0}) {
      const auto [z0, z1] = box_muller_pair(1.0, u2);
      CHECK(z0 == 0.0);
      CHECK(std::abs(z1) == 0.0);
    }
  }
  SUBCASE("u1 = e^-2") {
    const auto [z0, z1] = box_muller_pair(std::exp(-2.0), 0.0);
    CHECK(z0 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(z1 == 0.0);
    const auto [w0, w1] = box_muller_pair(std::exp(-2.0), 0.25);
    CHECK(std::abs(w0) < 1e-12);
    CHECK(std::abs(w1 - 2.0) < 1e-12);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(box_muller_pair(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(box_muller_pair(-0.1, 0.5), DomainError);
    CHECK_THROWS_AS(box_muller_pair(1.5, 0.5), DomainError);
    CHECK_THROWS_AS(box_muller_pair(0.5, 1.5), DomainError);
    CHECK_THROWS_AS(box_muller_pair(std::numeric_limits<double>::quiet_NaN(), 0.5), DomainError);
  }
  SUBCASE("property: circle identity within 4 ulps") {
    UniformSource source(2718);
    double worst_ulps = 0;
    for (int i = 0; i < 100000; ++i) {
      const double u1 = source(), u2 = source();
      const auto [z0, z1] = box_muller_pair(u1, u2);
      const double expected = -2.0 * std::log(u1);
      if (expected == 0.0) continue;
      worst_ulps = std::max(worst_ulps, std::abs(z0 * z0 + z1 * z1 - expected) / ulp(expected));
    }
    CHECK(worst_ulps <= 4.0);
  }
}

TEST_CASE("gaussian_stream") {
  UniformSource source(1);
  CHECK(gaussian_stream(source, 0).size() == 0);

  const Eigen::VectorXd flat = gaussian_stream(source, 7, 3.5, 0.0);
  CHECK((flat.array() == 3.5).all());

  CHECK_THROWS_AS(gaussian_stream(source, 4, 0.0, -1.0), ParameterError);

  SUBCASE("pairs are consumed whole, u1 then u2") {
    UniformSource s1(9), s2(9);
    const Eigen::VectorXd z = gaussian_stream(s1, 3, 1.0, 2.0);
    const double a = s2(), b = s2();
    const auto [p0, p1] = box_muller_pair(a, b);
    const double c = s2(), d = s2();
    const auto [p2, p3] = box_muller_pair(c, d);
    (void)p3;
    CHECK(z[0] == 1.0 + 2.0 * p0);
    CHECK(z[1] == 1.0 + 2.0 * p1);
    CHECK(z[2] == 1.0 + 2.0 * p2);
    // the odd tail still consumed a full pair
    CHECK(s1() == s2());
  }
  SUBCASE("seed determinism") {
    UniformSource a(77), b(77);
    const Eigen::VectorXd x = gaussian_stream(a, 1001);
    const Eigen::VectorXd y = gaussian_stream(b, 1001);
    CHECK((x.array() == y.array()).all());
  }
  SUBCASE("moments over 10^6 samples") {
    UniformSource s(42);
    const SampleStats st = normality_stats(gaussian_stream(s, 1000000));
    CHECK(std::abs(st.mean) < 0.005);
    CHECK(std::abs(st.variance - 1.0) < 0.01);
    CHECK(std::abs(st.skewness) < 0.01);
    CHECK(std::abs(st.excess_kurtosis) < 0.02);
  }
}

TEST_CASE("galton") {
  SUBCASE("single row is a fair coin") {
    UniformSource s(3);
    int ones = 0;
    for (int i = 0; i < 100000; ++i) {
      const int b = galton_sample(s, {1});
      REQUIRE((b == 0 || b == 1));
      ones += b;
    }
    CHECK(std::abs(ones / 100000.0 - 0.5) < 0.01);
  }
  SUBCASE("two rows follow binomial(2, 1/2)") {
    UniformSource s(4);
    std::array<int, 3> counts{};
    const int n = 1000000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(galton_sample(s, {2}))];
    CHECK(std::abs(counts[0] / double(n) - 0.25) < 0.005);
    CHECK(std::abs(counts[1] / double(n) - 0.50) < 0.005);
    CHECK(std::abs(counts[2] / double(n) - 0.25) < 0.005);
  }
  SUBCASE("64 rows: binomial moments and support") {
    UniformSource s(5);
    const int n = 100000;
    Eigen::VectorXd bins(n), standardized(n);
    bool support = true;
    for (int i = 0; i < n; ++i) {
      const int b = galton_sample(s, {64});
      support = support && b >= 0 && b <= 64;
      bins[i] = b;
      standardized[i] = galton_standardize(b, {64});
    }
    CHECK(support);
    const auto st = normality_stats(bins);
    CHECK(std::abs(st.mean - 32.0) < 0.1);
    CHECK(std::abs(st.variance / 16.0 - 1.0) < 0.05);
    const auto z = normality_stats(standardized);
    CHECK(z.excess_kurtosis > -0.2);
    CHECK(z.excess_kurtosis < 0.2);
  }
  SUBCASE("standardization") {
    CHECK(galton_standardize(2, {4}) == 0.0);
    CHECK(galton_standardize(4, {4}) == 2.0);
    CHECK(galton_standardize(0, {4}) == -2.0);
    UniformSource s(1);
    CHECK_THROWS_AS(galton_sample(s, {0}), ParameterError);
  }
}

TEST_CASE("normality_stats") {
  auto st = normality_stats(Eigen::VectorXd::Constant(4, 1.0));
  CHECK(st.mean == 1.0);
  CHECK(st.variance == 0.0);
  CHECK(st.skewness == 0.0);

  st = normality_stats(Eigen::Vector2d(-1.0, 1.0));
  CHECK(st.mean == 0.0);
  CHECK(st.variance == 2.0);

  Eigen::VectorXd v(5);
  v << 0, 1, 2, 3, 4;
  st = normality_stats(v);
  CHECK(st.n == 5);
  CHECK(st.mean == 2.0);
  CHECK(st.variance == 2.5);
  CHECK(st.skewness == doctest::Approx(0.0));
  // m4/m2^2 - 3 = 6.8/4 - 3
  CHECK(st.excess_kurtosis == doctest::Approx(-1.3));

  CHECK_THROWS_AS(normality_stats(Eigen::VectorXd::Zero(1)), InsufficientDataError);
}

TEST_CASE("histogram") {
  auto h = histogram(Eigen::VectorXd::Constant(1, 0.5), 1, 0.0, 1.0);
  CHECK(h.counts == std::vector<std::uint64_t>{1});

  h = histogram(Eigen::VectorXd(), 4, -1.0, 1.0);
  CHECK(h.counts == std::vector<std::uint64_t>(4, 0));
  CHECK(h.total() == 0);

  Eigen::VectorXd edge(5);
  edge << -2.0, -1.0, 0.0, 1.0, 3.0;
  h = histogram(edge, 2, -1.0, 1.0);
  CHECK(h.underflow == 1);
  CHECK(h.overflow == 1);
  CHECK(h.counts == std::vector<std::uint64_t>{1, 2});
  CHECK(h.total() == 5);

  CHECK_THROWS_AS(histogram(edge, 0, 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(histogram(edge, 3, 1.0, 1.0), ParameterError);

  SUBCASE("bell shape over 10^6 normal samples") {
    UniformSource s(8);
    const Eigen::VectorXd x = gaussian_stream(s, 1000000);
    const auto g = histogram(x, 20, -3.0, 3.0);
    CHECK(g.total() == 1000000);
    const double center = static_cast<double>(std::max(g.counts[9], g.counts[10]));
    CHECK(center > 5.0 * static_cast<double>(g.counts.front()));
    CHECK(center > 5.0 * static_cast<double>(g.counts.back()));
  }
}
