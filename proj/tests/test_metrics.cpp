#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/metrics.hpp"
#include "fuzzypov/rng.hpp"

using namespace fuzzypov;

TEST_CASE("bias is the mean deviation from truth") {
  CHECK(bias(std::vector<double>{0.2, 0.2, 0.2}, 0.2) == 0.0);
  CHECK(bias(std::vector<double>{0.2, 0.4}, 0.2) == doctest::Approx(0.1));
  CHECK(bias(std::vector<double>{0.3 - 0.05, 0.3 + 0.05}, 0.3) == doctest::Approx(0.0));
  CHECK_THROWS_WITH_AS(bias(std::vector<double>{}, 0.0), doctest::Contains("EmptySequence"),
                       ValidationError);
}

TEST_CASE("cv averages per-replicate relative root MSEs") {
  CHECK(cv(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK(cv(std::vector<double>{0.5}, std::vector<double>{0.0025}) == doctest::Approx(0.1));
  // per-replicate ratios 0.1 and 0.3 average to 0.2
  CHECK(cv(std::vector<double>{1.0, 1.0}, std::vector<double>{0.01, 0.09}) ==
        doctest::Approx(0.2));
  CHECK_THROWS_WITH_AS(cv(std::vector<double>{0.0}, std::vector<double>{0.1}),
                       doctest::Contains("NonPositiveEstimate"), ValidationError);
  CHECK_THROWS_WITH_AS(cv(std::vector<double>{0.5}, std::vector<double>{0.1, 0.2}),
                       doctest::Contains("LengthMismatch"), ValidationError);
}

TEST_CASE("cv2 reference values") {
  CHECK(std::abs(cv2(0.4078) - 0.3776) <= 1e-4);
  CHECK(std::abs(cv2(0.0450) - 0.0449) <= 1e-4);
  CHECK(cv2(0.0) == 0.0);
  CHECK_THROWS_WITH_AS(cv2(-0.1), doctest::Contains("NegativeCv"), ValidationError);
}

TEST_CASE("cv2 is monotone, bounded by its argument and approaches one") {
  Rng rng(37);
  double previous = 0.0;
  for (double x = 0.0; x <= 5.0; x += 0.01) {
    const double value = cv2(x);
    CHECK(value >= previous);
    CHECK(value <= x + 1e-15);
    CHECK(value < 1.0);
    previous = value;
  }
  CHECK(cv2(1000.0) > 0.999999);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.next_double() * 50.0;
    CHECK(cv2(x) <= x + 1e-15);
  }
}

TEST_CASE("publication flag uses the 0.166 limit") {
  CHECK(publishable(0.166));
  CHECK(!publishable(0.1661));
}

TEST_CASE("aggregates of a perfect estimator vanish") {
  std::vector<DomainReplicates> domains(2);
  domains[0].estimates = {0.3, 0.3};
  domains[0].mse_estimates = {0.0, 0.0};
  domains[1].estimates = {0.5, 0.5};
  domains[1].mse_estimates = {0.0, 0.0};
  const MseAggregates aggregates = mse_aggregates(domains, std::vector<double>{0.3, 0.5});
  CHECK(aggregates.atmse == 0.0);
  CHECK(aggregates.aemse == 0.0);
  CHECK(aggregates.bmse == 0.0);
}

TEST_CASE("aggregates match hand arithmetic") {
  std::vector<DomainReplicates> domains(1);
  domains[0].estimates = {0.4, 0.2};  // truth 0.3, deviations +-0.1
  domains[0].mse_estimates = {0.01, 0.01};
  const MseAggregates aggregates = mse_aggregates(domains, std::vector<double>{0.3});
  CHECK(aggregates.atmse == doctest::Approx(0.01));
  CHECK(aggregates.aemse == doctest::Approx(0.01));
  CHECK(aggregates.bmse == doctest::Approx(0.0));
}

TEST_CASE("uniformly inflated MSE estimates shift the MSE bias by the inflation") {
  Rng rng(41);
  std::vector<DomainReplicates> domains(3);
  std::vector<double> truth;
  for (auto& d : domains) {
    const double t = rng.next_double();
    truth.push_back(t);
    for (int r = 0; r < 20; ++r) {
      d.estimates.push_back(t + (rng.next_double() - 0.5) * 0.1);
      d.mse_estimates.push_back(rng.next_double() * 0.01);
    }
  }
  const MseAggregates base = mse_aggregates(domains, truth);
  const double c = 0.037;
  for (auto& d : domains)
    for (double& m : d.mse_estimates) m += c;
  const MseAggregates inflated = mse_aggregates(domains, truth);
  CHECK(inflated.bmse - base.bmse == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("the MSE bias is exactly the aggregate difference") {
  Rng rng(43);
  for (int round = 0; round < 20; ++round) {
    std::vector<DomainReplicates> domains(1 + rng.below(4));
    std::vector<double> truth;
    for (auto& d : domains) {
      truth.push_back(rng.next_double());
      for (int r = 0; r < 5; ++r) {
        d.estimates.push_back(rng.next_double());
        d.mse_estimates.push_back(rng.next_double() * 0.05);
      }
    }
    const MseAggregates aggregates = mse_aggregates(domains, truth);
    CHECK(aggregates.bmse == aggregates.aemse - aggregates.atmse);
  }
}

TEST_CASE("aggregates are invariant to domain order") {
  std::vector<DomainReplicates> domains(3);
  domains[0].estimates = {0.1, 0.2};
  domains[0].mse_estimates = {0.01, 0.02};
  domains[1].estimates = {0.3, 0.4};
  domains[1].mse_estimates = {0.03, 0.04};
  domains[2].estimates = {0.5, 0.6};
  domains[2].mse_estimates = {0.05, 0.06};
  const std::vector<double> truth = {0.15, 0.35, 0.55};
  const MseAggregates forward = mse_aggregates(domains, truth);
  std::vector<DomainReplicates> reversed(domains.rbegin(), domains.rend());
  const std::vector<double> truth_reversed(truth.rbegin(), truth.rend());
  const MseAggregates backward = mse_aggregates(reversed, truth_reversed);
  CHECK(forward.atmse == doctest::Approx(backward.atmse).epsilon(1e-15));
  CHECK(forward.aemse == doctest::Approx(backward.aemse).epsilon(1e-15));
}

TEST_CASE("aggregate validation") {
  std::vector<DomainReplicates> domains(1);
  domains[0].estimates = {0.1};
  domains[0].mse_estimates = {0.01};
  CHECK_THROWS_WITH_AS(mse_aggregates(domains, std::vector<double>{0.1}),
                       doctest::Contains("TooFewReplicates"), ValidationError);
  domains[0].estimates = {0.1, 0.2};
  CHECK_THROWS_WITH_AS(mse_aggregates(domains, std::vector<double>{0.1}),
                       doctest::Contains("LengthMismatch"), ValidationError);
}

TEST_CASE("a zero replicate estimate yields an undefined CV, not a failed report") {
  std::map<std::string, DomainReplicates> per_domain;
  per_domain["A"].estimates = {0.0, 0.3};
  per_domain["A"].mse_estimates = {0.01, 0.01};
  const std::map<std::string, double> truth = {{"A", 0.2}};
  const MetricsReport report = make_metrics_report(per_domain, truth);
  CHECK(std::isnan(report.per_domain.at("A").cv));
  CHECK(std::isnan(report.per_domain.at("A").cv2));
  CHECK(!report.per_domain.at("A").publishable);
  CHECK(report.per_domain.at("A").bias == doctest::Approx(-0.05));
}

TEST_CASE("metrics report assembles per-domain measures and skips NATIONAL in aggregates") {
  std::map<std::string, DomainReplicates> per_domain;
  per_domain["A"].estimates = {0.2, 0.3};
  per_domain["A"].mse_estimates = {0.01, 0.01};
  per_domain["NATIONAL"].estimates = {0.25, 0.25};
  per_domain["NATIONAL"].mse_estimates = {0.001, 0.001};
  const std::map<std::string, double> truth = {{"A", 0.25}, {"NATIONAL", 0.25}};
  const MetricsReport report = make_metrics_report(per_domain, truth);
  CHECK(report.per_domain.at("A").bias == doctest::Approx(0.0));
  CHECK(report.per_domain.at("A").cv > 0.0);
  CHECK(report.replicate_count == 2);
  // aggregate covers the sub-domain only
  CHECK(report.aggregate.aemse == doctest::Approx(0.01));
}
