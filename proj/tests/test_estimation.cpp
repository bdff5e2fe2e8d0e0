#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/estimation.hpp"
#include "fuzzypov/rng.hpp"

using namespace fuzzypov;

namespace {

DomainData make_domain(std::vector<double> income, std::vector<double> weight = {}) {
  DomainData d;
  d.income = std::move(income);
  d.weight = weight.empty() ? std::vector<double>(d.income.size(), 1.0) : std::move(weight);
  return d;
}

DomainData random_domain(Rng& rng, std::size_t n) {
  DomainData d;
  for (std::size_t i = 0; i < n; ++i) {
    d.income.push_back(rng.next_double() * 1000.0);
    d.weight.push_back(0.25 + rng.next_double() * 4.0);
  }
  return d;
}

}  // namespace

TEST_CASE("weighted ecdf follows the counting definition") {
  const auto d = make_domain({1, 2, 2, 3});
  const WeightedEcdf f = weighted_ecdf(d);
  CHECK(f(2.0) == doctest::Approx(0.75));
  CHECK(f(3.0) == 1.0);
  CHECK(f(0.5) == 0.0);
  CHECK(f(2.5) == doctest::Approx(0.75));
}

TEST_CASE("weighted ecdf of a single point is a step to one") {
  const auto d = make_domain({5}, {2});
  const WeightedEcdf f = weighted_ecdf(d);
  CHECK(f(5.0) == 1.0);
  CHECK(f(4.999) == 0.0);
}

TEST_CASE("weighted ecdf respects weights") {
  const auto d = make_domain({1, 2}, {3, 1});
  const WeightedEcdf f = weighted_ecdf(d);
  CHECK(f(1.0) == doctest::Approx(0.75));
}

TEST_CASE("ecdf share is nondecreasing and ends at one") {
  Rng rng(11);
  for (int round = 0; round < 10; ++round) {
    const auto d = random_domain(rng, 1 + rng.below(60));
    const WeightedEcdf f = weighted_ecdf(d);
    CHECK(std::is_sorted(f.share().begin(), f.share().end()));
    CHECK(f.share().back() == 1.0);
  }
}

TEST_CASE("ecdf rejects zero total weight") {
  CHECK_THROWS_WITH_AS(weighted_ecdf(make_domain({1, 2}, {0, 0})),
                       doctest::Contains("ZeroTotalWeight"), ValidationError);
}

TEST_CASE("lorenz complement under the total-income denominator") {
  const auto d = make_domain({1, 3});
  const LorenzComplement l = lorenz_complement(d);
  CHECK(l(1.0) == doctest::Approx(0.75));
  CHECK(l(3.0) == 0.0);
}

TEST_CASE("lorenz complement vanishes at the maximum income") {
  const auto d = make_domain({4, 4, 4}, {1, 2, 5});
  const LorenzComplement l = lorenz_complement(d);
  CHECK(l(4.0) == 0.0);
}

TEST_CASE("lorenz complement counts strictly richer units") {
  const auto d = make_domain({1, 1, 2});
  const LorenzComplement l = lorenz_complement(d);
  CHECK(l(1.0) == doctest::Approx(0.5));
}

TEST_CASE("lorenz complement rejects zero total income") {
  CHECK_THROWS_WITH_AS(lorenz_complement(make_domain({0, 0})),
                       doctest::Contains("ZeroTotalIncome"), ValidationError);
}

TEST_CASE("ecdf and lorenz are invariant to observation order") {
  Rng rng(13);
  auto d = random_domain(rng, 40);
  auto shuffled = d;
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(shuffled.income[i - 1], shuffled.income[j]);
    std::swap(shuffled.weight[i - 1], shuffled.weight[j]);
  }
  const WeightedEcdf f1 = weighted_ecdf(d);
  const WeightedEcdf f2 = weighted_ecdf(shuffled);
  const LorenzComplement l1 = lorenz_complement(d);
  const LorenzComplement l2 = lorenz_complement(shuffled);
  for (double y : d.income) {
    CHECK(f1(y) == doctest::Approx(f2(y)).epsilon(1e-12));
    CHECK(l1(y) == doctest::Approx(l2(y)).epsilon(1e-12));
  }
}

TEST_CASE("weighted quantile uses the lower convention") {
  const auto d = make_domain({1, 2, 3, 4});
  CHECK(weighted_quantile(d, 0.5) == 2.0);
  CHECK(weighted_quantile(d, 0.0) == 1.0);
  CHECK(weighted_quantile(d, 1.0) == 4.0);
}

TEST_CASE("weighted quantile respects weights") {
  const auto d = make_domain({10, 20}, {1, 3});
  CHECK(weighted_quantile(d, 0.5) == 20.0);
  CHECK(weighted_quantile(d, 0.25) == 10.0);
}

TEST_CASE("weighted quantile rejects a probability outside [0,1]") {
  const auto d = make_domain({1});
  CHECK_THROWS_WITH_AS(weighted_quantile(d, -0.1), doctest::Contains("POutOfRange"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(weighted_quantile(d, 1.1), doctest::Contains("POutOfRange"),
                       ValidationError);
}

TEST_CASE("equal-weight quantiles recover order statistics") {
  Rng rng(17);
  std::vector<double> incomes;
  for (int i = 0; i < 25; ++i) incomes.push_back(rng.next_double() * 100.0);
  const auto d = make_domain(incomes);
  std::sort(incomes.begin(), incomes.end());
  const auto n = static_cast<double>(incomes.size());
  for (std::size_t k = 1; k <= incomes.size(); ++k)
    CHECK(weighted_quantile(d, static_cast<double>(k) / n) == incomes[k - 1]);
}

TEST_CASE("batch quantiles agree with the single version") {
  Rng rng(19);
  const auto d = random_domain(rng, 30);
  const std::vector<double> ps = {0.0, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0};
  const auto batch = weighted_quantiles(d, ps);
  for (std::size_t i = 0; i < ps.size(); ++i)
    CHECK(batch[i] == weighted_quantile(d, ps[i]));
}

TEST_CASE("poverty line is sixty percent of the weighted median") {
  CHECK(poverty_line(make_domain({1, 2, 3})) == doctest::Approx(1.2));
  CHECK(poverty_line(make_domain({7, 7, 7, 7})) == doctest::Approx(4.2));
  CHECK(poverty_line(make_domain({1, 2, 3, 4})) == doctest::Approx(1.2));
}

TEST_CASE("head count ratio counts incomes at or below the line") {
  const auto d = make_domain({1, 2, 3, 4});
  CHECK(head_count_ratio(d, 2.5) == doctest::Approx(0.5));
  CHECK(head_count_ratio(d, 0.5) == 0.0);
  CHECK(head_count_ratio(d, 4.0) == 1.0);
  CHECK(head_count_ratio(make_domain({1, 2}, {3, 1}), 1.0) == doctest::Approx(0.75));
}

TEST_CASE("fuzzy index is the weighted mean membership") {
  const auto d = make_domain({5, 6});
  CHECK(fuzzy_index(d, std::vector<double>{1, 1}) == 1.0);
  CHECK(fuzzy_index(d, std::vector<double>{0, 0}) == 0.0);
  CHECK(fuzzy_index(d, std::vector<double>{1, 0}) == doctest::Approx(0.5));
  CHECK(fuzzy_index(make_domain({5, 6}, {3, 1}), std::vector<double>{1, 0}) ==
        doctest::Approx(0.75));
}

TEST_CASE("fuzzy index validates its inputs") {
  const auto d = make_domain({1, 2});
  CHECK_THROWS_WITH_AS(fuzzy_index(d, std::vector<double>{1}),
                       doctest::Contains("LengthMismatch"), ValidationError);
  CHECK_THROWS_WITH_AS(fuzzy_index(d, std::vector<double>{1, 1.5}),
                       doctest::Contains("MembershipOutOfRange"), ValidationError);
  CHECK_THROWS_WITH_AS(fuzzy_index(make_domain({1, 2}, {0, 0}), std::vector<double>{1, 0}),
                       doctest::Contains("ZeroTotalWeight"), ValidationError);
}

TEST_CASE("fuzzy index is invariant to rescaling all weights") {
  Rng rng(23);
  const auto d = random_domain(rng, 35);
  std::vector<double> mu;
  for (std::size_t i = 0; i < d.size(); ++i) mu.push_back(rng.next_double());
  const double base = fuzzy_index(d, mu);
  for (double scale : {1e-6, 0.5, 3.0, 1e6}) {
    auto scaled = d;
    for (double& w : scaled.weight) w *= scale;
    CHECK(fuzzy_index(scaled, mu) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("head count ratio equals the fuzzy index of the crisp membership") {
  Rng rng(29);
  const auto d = random_domain(rng, 50);
  const double line = poverty_line(d);
  std::vector<double> crisp;
  for (double y : d.income) crisp.push_back(y <= line ? 1.0 : 0.0);
  CHECK(head_count_ratio(d, line) == fuzzy_index(d, crisp));
}
