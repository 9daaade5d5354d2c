#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "adi/filters.hpp"

using namespace adi;

TEST_CASE("exponential weight formula", "[filters]") {
  CHECK(exp_filter_weight(0.1, 7, 7, 0) == 0.1);
  CHECK(exp_filter_weight(0.1, 6, 7, 0) == Catch::Approx(0.09).epsilon(1e-14));
  CHECK(exp_filter_weight(0.1, 4, 7, 5) == 0.0);  // before birth
  CHECK(exp_filter_weight(0.1, 8, 7, 0) == 0.0);  // after window end
  CHECK_THROWS_AS(exp_filter_weight(0.0, 0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(exp_filter_weight(1.5, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("uniform weight formula", "[filters]") {
  CHECK(uniform_filter_weight(1, 1, 1) == 1.0);
  for (std::int64_t t = 5; t <= 9; ++t)
    CHECK(uniform_filter_weight(t, 9, 5) == 0.2);
  CHECK(uniform_filter_weight(4, 9, 5) == 0.0);
  CHECK_THROWS_AS(uniform_filter_weight(3, 4, 5), std::invalid_argument);
}

TEST_CASE("normalized weights form a probability vector", "[filters]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> alpha_d(0.01, 1.0);
  std::uniform_int_distribution<std::int64_t> len_d(1, 120);
  for (int rep = 0; rep < 50; ++rep) {
    const FilterSpec spec = rep % 2 == 0
                                ? FilterSpec::exponential(alpha_d(rng), 3)
                                : FilterSpec::uniform(3);
    const auto w = normalized_weights(spec, 2 + len_d(rng));
    double sum = 0.0;
    for (double x : w) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("smoothed_value worked examples", "[filters]") {
  const std::vector<double> constant{3.25, 3.25, 3.25, 3.25};
  CHECK(smoothed_value(FilterSpec::exponential(0.3), constant) ==
        Catch::Approx(3.25).margin(1e-12));
  CHECK(smoothed_value(FilterSpec::uniform(), constant) == 3.25);

  const std::vector<double> ramp{1.0, 2.0, 3.0};
  CHECK(smoothed_value(FilterSpec::uniform(), ramp) == 2.0);

  // alpha=0.5 over [0,0,1]: unnormalized weights (0.125, 0.25, 0.5),
  // truncated sum 0.875, value 0.5/0.875.
  const std::vector<double> step{0.0, 0.0, 1.0};
  CHECK(smoothed_value(FilterSpec::exponential(0.5, 1), step) ==
        Catch::Approx(4.0 / 7.0).margin(1e-12));

  CHECK_THROWS_AS(smoothed_value(FilterSpec::uniform(), std::vector<double>{}),
                  std::domain_error);
}

TEST_CASE("smoothed_value stays inside the series range and is monotone",
          "[filters]") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_real_distribution<double> alpha_d(0.05, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = gauss(rng);
      b[i] = a[i] - std::abs(gauss(rng));  // b <= a pointwise
    }
    const FilterSpec spec = FilterSpec::exponential(alpha_d(rng));
    const double va = smoothed_value(spec, a);
    const double vb = smoothed_value(spec, b);
    CHECK(vb <= va + 1e-12);
    CHECK(va >= *std::min_element(a.begin(), a.end()) - 1e-12);
    CHECK(va <= *std::max_element(a.begin(), a.end()) + 1e-12);
  }
}

TEST_CASE("plain recursion from the first sample equals batch with "
          "first-sample initialization",
          "[filters]") {
  // Iterating alpha*x + (1-alpha)*prev from prev = series[t0] weights the
  // first sample by (1-alpha)^(T-t0) instead of alpha*(1-alpha)^(T-t0);
  // those weights already sum to 1.
  const std::vector<double> step{0.0, 0.0, 1.0};
  double v = step[0];
  for (std::size_t i = 1; i < step.size(); ++i)
    v = exp_recursive_update(v, step[i], 0.5);
  CHECK(v == Catch::Approx(0.5).margin(1e-12));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 30; ++rep) {
    const double alpha = std::uniform_real_distribution<>(0.02, 0.98)(rng);
    std::vector<double> series(60);
    for (auto& x : series) x = gauss(rng);
    double rec = series[0];
    for (std::size_t i = 1; i < series.size(); ++i)
      rec = exp_recursive_update(rec, series[i], alpha);
    const std::int64_t T = static_cast<std::int64_t>(series.size()) - 1;
    double batch = std::pow(1.0 - alpha, static_cast<double>(T)) * series[0];
    for (std::int64_t t = 1; t <= T; ++t)
      batch += exp_filter_weight(alpha, t, T, 0) * series[t];
    CHECK(rec == Catch::Approx(batch).margin(1e-10));
  }
}

TEST_CASE("running smoother matches batch smoothing at every step",
          "[filters]") {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss(0.0, 1.5);
  std::uniform_real_distribution<double> alpha_d(0.01, 1.0);
  std::uniform_int_distribution<std::size_t> len_d(1, 200);
  for (int rep = 0; rep < 200; ++rep) {
    const FilterSpec spec = rep % 3 == 2
                                ? FilterSpec::uniform()
                                : FilterSpec::exponential(alpha_d(rng));
    RunningSmoother sm(spec);
    std::vector<double> series;
    const std::size_t len = len_d(rng);
    for (std::size_t i = 0; i < len; ++i) {
      series.push_back(gauss(rng));
      sm.absorb(series.back());
      REQUIRE(sm.value() ==
              Catch::Approx(smoothed_value(spec, series)).margin(1e-10));
    }
  }
}

TEST_CASE("running smoother guards its state", "[filters]") {
  RunningSmoother sm(FilterSpec::exponential(0.2));
  CHECK_FALSE(sm.has_value());
  CHECK_THROWS_AS(sm.value(), std::logic_error);
  sm.absorb(4.0);
  CHECK(sm.has_value());
  CHECK(sm.value() == 4.0);
}

TEST_CASE("filter string forms round-trip", "[filters]") {
  const auto specs = parse_filter_list("exp:0.1,exp:0.2,unif");
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].kind == FilterKind::Exponential);
  CHECK(specs[0].alpha == 0.1);
  CHECK(specs[2].kind == FilterKind::Uniform);
  CHECK(format_filter_list(specs) == "exp:0.1,exp:0.2,unif");
  CHECK_THROWS_AS(parse_filter("exp:2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_filter("boxcar"), std::invalid_argument);
  CHECK_THROWS_AS(parse_filter_list(""), std::invalid_argument);
}
