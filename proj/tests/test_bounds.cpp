#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcsel/bounds.hpp"
#include "mcsel/partition.hpp"

using namespace mcsel;

namespace {

// Independent oracle for the series bound: direct summation.
double direct_dirichlet_sum(double p, long T) {
  double sum = 0.0;
  for (long t = 1; t <= T; ++t) sum += std::pow(static_cast<double>(t), -p);
  return sum;
}

bounds::BoundInputs single_worker_inputs() {
  bounds::BoundInputs in;
  in.horizon = 10000;
  in.workers = 1;
  in.q_max = 5.0;
  in.alpha = 1.0;
  in.hoelder_constant = 1.0;
  in.dims = {3};
  return in;
}

}  // namespace

TEST_CASE("regret bound terms at the reference point") {
  auto in = single_worker_inputs();
  const auto breakdown = bounds::regret_bound(in);
  // The Dirichlet tail term is q_max W^2 pi^2 / 3 = 5 pi^2 / 3.
  CHECK(breakdown.tail == doctest::Approx(16.4493).epsilon(1e-5));
  CHECK(breakdown.total ==
        doctest::Approx(breakdown.exploration + breakdown.estimation + breakdown.tail +
                        breakdown.approximation));
  CHECK(breakdown.total == doctest::Approx(831055.9184859658).epsilon(1e-9));
}

TEST_CASE("regret bound at T=1: the log term vanishes") {
  auto in = single_worker_inputs();
  in.horizon = 1;
  const auto breakdown = bounds::regret_bound(in);
  // ln 1 = 0, every power of 1 is 1: exploration = q_max W 2^D.
  CHECK(breakdown.exploration == doctest::Approx(40.0));
  CHECK(breakdown.total == doctest::Approx(71.91344228362001).epsilon(1e-12));
}

TEST_CASE("regret bound divided by T decreases for large T") {
  auto in = single_worker_inputs();
  double previous = std::numeric_limits<double>::infinity();
  for (long T : {1000L, 10000L, 100000L, 1000000L, 10000000L}) {
    in.horizon = T;
    const double rate = bounds::regret_bound(in).total / static_cast<double>(T);
    CHECK(rate < previous);
    previous = rate;
  }
}

TEST_CASE("assessment bound evaluates its closed form") {
  CHECK(bounds::assessment_bound(1, 1.0, 3) == doctest::Approx(8.0));  // 2^D
  CHECK(bounds::assessment_bound(10000, 1.0, 3) ==
        doctest::Approx(35809.35139852644).epsilon(1e-12));
  // Hand evaluation in coarse arithmetic lands near 35812.
  CHECK(bounds::assessment_bound(10000, 1.0, 3) == doctest::Approx(35812.0).epsilon(1e-3));
  // Sublinear: bound / T shrinks along decades.
  double previous = std::numeric_limits<double>::infinity();
  for (long T : {100L, 10000L, 1000000L, 100000000L}) {
    const double rate = bounds::assessment_bound(T, 1.0, 3) / static_cast<double>(T);
    CHECK(rate < previous);
    previous = rate;
  }
}

TEST_CASE("scaled assessment bound folds the exploration factor into the log term") {
  const long T = 10000;
  const double full = bounds::assessment_bound(T, 1.0, 3);
  const double scaled = bounds::assessment_bound_scaled(T, 1.0, 3, 0.003);
  CHECK(scaled < full);
  const double cells = std::pow(1.0 + std::pow(10000.0, 1.0 / 6.0), 3.0);
  CHECK(scaled == doctest::Approx(cells * (1.0 + 0.003 * std::log(10000.0) *
                                                     std::pow(10000.0, 1.0 / 3.0))));
  CHECK(bounds::assessment_bound_scaled(T, 1.0, 3, 1.0) == doctest::Approx(full));
}

TEST_CASE("storage bound dominates the actual controller tables") {
  CHECK(bounds::storage_bound(1, 1.0, 3) == doctest::Approx(16.0));  // 2 * 2^3
  CHECK(bounds::storage_bound(10000, 1.0, 3) == doctest::Approx(359.11561440358963).epsilon(1e-12));
  // Actual dense tables: 2 h^D with h = ceil(T^(1/(3a+D))).
  for (long T : {1L, 100L, 10000L, 1000000L}) {
    const int h = cells_per_axis(T, 1.0, 3);
    const double actual = 2.0 * std::pow(h, 3);
    CHECK(actual <= bounds::storage_bound(T, 1.0, 3) + 1e-9);
  }
}

TEST_CASE("series bound dominates direct summation") {
  CHECK(bounds::dirichlet_partial_bound(0.5, 1) == doctest::Approx(1.0));
  CHECK(bounds::dirichlet_partial_bound(2.0, 1) == doctest::Approx(1.0));

  // p = 2, large T: bound tends to 2 while the series tends to pi^2/6.
  CHECK(bounds::dirichlet_partial_bound(2.0, 1000000) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(direct_dirichlet_sum(2.0, 1000000) == doctest::Approx(1.64493306684877).epsilon(1e-9));

  // p = 0.5, T = 100: bound 19 versus direct sum ~18.59.
  CHECK(bounds::dirichlet_partial_bound(0.5, 100) == doctest::Approx(19.0));
  CHECK(direct_dirichlet_sum(0.5, 100) == doctest::Approx(18.58960382478415).epsilon(1e-9));

  for (double p : {0.5, 1.5, 2.0, 3.0}) {
    for (long T : {10L, 1000L, 1000000L}) {
      CHECK(direct_dirichlet_sum(p, T) <= bounds::dirichlet_partial_bound(p, T) + 1e-9);
    }
  }
}

TEST_CASE("series bound rejects p = 1 and bad inputs") {
  CHECK_THROWS_AS(bounds::dirichlet_partial_bound(1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(bounds::dirichlet_partial_bound(0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(bounds::dirichlet_partial_bound(2.0, 0), std::invalid_argument);
}

TEST_CASE("all bounds are monotone non-decreasing in T") {
  auto in = single_worker_inputs();
  in.workers = 100;
  double regret_prev = 0.0, assess_prev = 0.0, storage_prev = 0.0, series_prev = 0.0;
  for (long T : {1L, 10L, 100L, 1000L, 10000L, 100000L}) {
    in.horizon = T;
    const double regret = bounds::regret_bound(in).total;
    const double assess = bounds::assessment_bound(T, 1.0, 3);
    const double storage = bounds::storage_bound(T, 1.0, 3);
    const double series = bounds::dirichlet_partial_bound(0.5, T);
    CHECK(regret >= regret_prev);
    CHECK(assess >= assess_prev);
    CHECK(storage >= storage_prev);
    CHECK(series >= series_prev);
    regret_prev = regret;
    assess_prev = assess;
    storage_prev = storage;
    series_prev = series;
  }
}

TEST_CASE("bound inputs are validated") {
  bounds::BoundInputs bad = single_worker_inputs();
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bounds::regret_bound(bad), std::invalid_argument);
  bad = single_worker_inputs();
  bad.dims = {};
  CHECK_THROWS_AS(bounds::regret_bound(bad), std::invalid_argument);
  bad = single_worker_inputs();
  bad.dims = {1, 2};  // neither 1 nor W entries
  CHECK_THROWS_AS(bounds::regret_bound(bad), std::invalid_argument);
}
