#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/estimation.hpp"
#include "fuzzypov/robustness.hpp"
#include "fuzzypov/rng.hpp"
#include "fuzzypov/simulation.hpp"

using namespace fuzzypov;

namespace {

// Definitional pairwise oracle for tau-b: counts concordant/discordant pairs
// and applies the tie-corrected denominator from tie-group sizes.
double tau_oracle(const std::vector<double>& r1, const std::vector<double>& r2) {
  const std::size_t n = r1.size();
  double concordant = 0.0, discordant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double product = (r1[i] - r1[j]) * (r2[i] - r2[j]);
      if (product > 0.0) ++concordant;
      else if (product < 0.0) ++discordant;
    }
  }
  auto tie_correction = [&](const std::vector<double>& r) {
    std::vector<double> sorted(r);
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (std::size_t k = 0; k < sorted.size();) {
      std::size_t j = k;
      while (j < sorted.size() && sorted[j] == sorted[k]) ++j;
      const double t = static_cast<double>(j - k);
      total += t * (t - 1.0) / 2.0;
      k = j;
    }
    return total;
  };
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return (concordant - discordant) /
         std::sqrt((pairs - tie_correction(r1)) * (pairs - tie_correction(r2)));
}

// Spearman oracle via the no-ties closed form 1 - 6 sum d^2 / (n(n^2-1)).
double rho_oracle_no_ties(const std::vector<double>& r1, const std::vector<double>& r2) {
  const auto n = static_cast<double>(r1.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) d2 += (r1[i] - r2[i]) * (r1[i] - r2[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

SurveyDataset area_dataset(Rng& rng, int areas, int per_area, double separation = 0.05) {
  std::vector<Observation> observations;
  for (int a = 0; a < areas; ++a) {
    for (int i = 0; i < per_area; ++i) {
      Observation obs;
      obs.unit_id = std::to_string(a) + "-" + std::to_string(i);
      obs.area = "Area" + std::to_string(a);
      obs.weight = 1.0;
      obs.income = std::exp(9.8 + separation * a + 0.5 * rng.next_normal());
      observations.push_back(std::move(obs));
    }
  }
  return SurveyDataset(std::move(observations), {});
}

}  // namespace

TEST_CASE("rank correlations on simple patterns") {
  const std::vector<double> identity = {1, 2, 3};
  const std::vector<double> reversed = {3, 2, 1};
  const std::vector<double> swapped = {1, 3, 2};
  CHECK(kendall_tau(identity, identity) == doctest::Approx(1.0));
  CHECK(kendall_tau(identity, reversed) == doctest::Approx(-1.0));
  CHECK(kendall_tau(identity, swapped) == doctest::Approx(1.0 / 3.0));
  CHECK(spearman_rho(identity, identity) == doctest::Approx(1.0));
  CHECK(spearman_rho(identity, reversed) == doctest::Approx(-1.0));
  CHECK(spearman_rho(identity, swapped) == doctest::Approx(0.5));
}

TEST_CASE("rank correlations match the oracles on all permutations up to n = 6") {
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<double> base(n);
    std::iota(base.begin(), base.end(), 1.0);
    std::vector<double> permuted = base;
    do {
      CHECK(kendall_tau(base, permuted) == doctest::Approx(tau_oracle(base, permuted)).epsilon(1e-15));
      CHECK(spearman_rho(base, permuted) ==
            doctest::Approx(rho_oracle_no_ties(base, permuted)).epsilon(1e-13));
    } while (std::next_permutation(permuted.begin(), permuted.end()));
  }
}

TEST_CASE("tied ranks agree with the midrank oracles") {
  Rng rng(71);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 3 + rng.below(8);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.below(4));  // many ties
      b[i] = static_cast<double>(rng.below(4));
    }
    const std::vector<double> ra = midranks(a);
    const std::vector<double> rb = midranks(b);
    const bool warn_a = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
    const bool warn_b = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
    if (warn_a || warn_b) {
      CHECK_THROWS_AS(kendall_tau(ra, rb), ValidationError);
      continue;
    }
    CHECK(std::abs(kendall_tau(ra, rb) - tau_oracle(ra, rb)) <= 1e-12);
    // Spearman on midranks is the plain product-moment correlation.
    const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
    const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cov += (ra[i] - mean_a) * (rb[i] - mean_b);
      va += (ra[i] - mean_a) * (ra[i] - mean_a);
      vb += (rb[i] - mean_b) * (rb[i] - mean_b);
    }
    CHECK(std::abs(spearman_rho(ra, rb) - cov / std::sqrt(va * vb)) <= 1e-12);
  }
}

TEST_CASE("rank correlations are symmetric and invariant to monotone relabeling") {
  Rng rng(73);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 4 + rng.below(6);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.next_double();
      b[i] = rng.next_double();
    }
    CHECK(kendall_tau(a, b) == doctest::Approx(kendall_tau(b, a)).epsilon(1e-15));
    CHECK(spearman_rho(a, b) == doctest::Approx(spearman_rho(b, a)).epsilon(1e-13));

    // strictly increasing transform of one side leaves both coefficients alone
    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(3.0 * a[i]) + 1.0;
    CHECK(kendall_tau(transformed, b) == doctest::Approx(kendall_tau(a, b)).epsilon(1e-13));
    CHECK(spearman_rho(transformed, b) == doctest::Approx(spearman_rho(a, b)).epsilon(1e-13));
  }
}

TEST_CASE("degenerate and mismatched rank vectors are rejected") {
  const std::vector<double> constant = {2, 2, 2};
  const std::vector<double> normal = {1, 2, 3};
  CHECK_THROWS_WITH_AS(kendall_tau(constant, normal), doctest::Contains("DegenerateRanks"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(spearman_rho(normal, constant), doctest::Contains("DegenerateRanks"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(kendall_tau(normal, std::vector<double>{1, 2}),
                       doctest::Contains("LengthMismatch"), ValidationError);
}

TEST_CASE("midranks average tied positions") {
  const std::vector<double> values = {10, 20, 20, 30};
  const std::vector<double> ranks = midranks(values);
  CHECK(ranks == std::vector<double>{1.0, 2.5, 2.5, 4.0});
}

TEST_CASE("single-threshold surface varies along z2 only and marks the boundary") {
  Rng rng(79);
  const SurveyDataset data = area_dataset(rng, 3, 120);
  const DomainData national = domain_data(data);

  SweepGrid chakravarty;
  chakravarty.kind = MembershipKind::kChakravarty2019;
  chakravarty.z2_values = weighted_quantiles(national, std::vector<double>{0.3, 0.5, 0.7});
  ReplicationPlan plan;
  plan.replicate_count = 30;
  plan.seed = 5;
  const auto surface = mse_surface(data, chakravarty, plan);
  REQUIRE(surface.size() == 3);
  for (const SurfacePoint& point : surface) {
    CHECK(!point.skipped);
    CHECK(point.z1 == 0.0);
    CHECK(point.mse >= 0.0);
  }

  SweepGrid trapezoid;
  trapezoid.kind = MembershipKind::kCerioliZani;
  const double q30 = weighted_quantile(national, 0.3);
  const double q70 = weighted_quantile(national, 0.7);
  trapezoid.z1_values = {q30, q70};
  trapezoid.z2_values = {q30, q70};
  const auto trapezoid_surface = mse_surface(data, trapezoid, plan);
  // inadmissible (z2 < z1) dropped; the two z1 == z2 points stay as markers
  REQUIRE(trapezoid_surface.size() == 3);
  int skipped = 0;
  for (const SurfacePoint& point : trapezoid_surface) {
    CHECK(point.z2 >= point.z1);
    if (point.skipped) {
      ++skipped;
      CHECK(point.z1 == point.z2);
      CHECK(std::isnan(point.mse));
    }
  }
  CHECK(skipped == 2);
}

TEST_CASE("a near-crisp upper threshold has lower MSE than a full-range ramp") {
  Rng rng(83);
  std::vector<Observation> observations;
  for (int i = 0; i < 500; ++i) {
    Observation obs;
    obs.unit_id = std::to_string(i);
    obs.area = "A";
    obs.weight = 1.0;
    obs.income = std::exp(10.0 + 0.5 * rng.next_normal());
    observations.push_back(std::move(obs));
  }
  const SurveyDataset data(std::move(observations), {});
  const DomainData national = domain_data(data);
  const double z2 = weighted_quantile(national, 0.99);
  const double min_income = *std::min_element(national.income.begin(), national.income.end());

  SweepGrid grid;
  grid.kind = MembershipKind::kCerioliZani;
  grid.z1_values = {min_income, z2 * (1.0 - 1e-6)};
  grid.z2_values = {z2};
  ReplicationPlan plan;
  plan.replicate_count = 500;
  plan.seed = 12;
  const auto surface = mse_surface(data, grid, plan);
  REQUIRE(surface.size() == 2);
  // same frozen replicates for both points; the spread-out ramp is noisier
  CHECK(surface[1].mse < surface[0].mse);
}

TEST_CASE("surfaces can also be estimated with jackknife replicates") {
  Rng rng(91);
  std::vector<Observation> observations;
  for (int h = 0; h < 3; ++h) {
    for (int p = 0; p < 6; ++p) {
      for (int u = 0; u < 4; ++u) {
        Observation obs;
        obs.unit_id = std::to_string(h) + "-" + std::to_string(p) + "-" + std::to_string(u);
        obs.stratum = "S" + std::to_string(h);
        obs.psu = "P" + std::to_string(h) + std::to_string(p);
        obs.household_id = obs.psu;
        obs.area = obs.stratum;
        obs.weight = 1.0;
        obs.income = std::exp(9.0 + 0.5 * rng.next_normal());
        observations.push_back(std::move(obs));
      }
    }
  }
  DesignInfo info;
  info.kind = DesignKind::kComplex;
  const SurveyDataset data(std::move(observations), info);
  const DomainData national = domain_data(data);

  SweepGrid grid;
  grid.kind = MembershipKind::kChakravarty2019;
  grid.z2_values = weighted_quantiles(national, std::vector<double>{0.4, 0.6});
  ReplicationPlan plan;
  plan.method = ResamplingMethod::kJackknife;
  const auto surface = mse_surface(data, grid, plan);
  REQUIRE(surface.size() == 2);
  for (const SurfacePoint& point : surface) CHECK(point.mse >= 0.0);
}

TEST_CASE("the grid must keep at least one admissible point") {
  Rng rng(89);
  const SurveyDataset data = area_dataset(rng, 2, 50);
  SweepGrid grid;
  grid.kind = MembershipKind::kCerioliZani;
  grid.z1_values = {100.0};
  grid.z2_values = {100.0};  // only the skipped boundary point survives
  ReplicationPlan plan;
  plan.replicate_count = 10;
  CHECK_THROWS_WITH_AS(mse_surface(data, grid, plan), doctest::Contains("no admissible"),
                       ValidationError);
}

TEST_CASE("rank stability: benchmark against itself and order-preserving changes") {
  Rng rng(97);
  // widely separated areas so every threshold induces the same ordering
  const SurveyDataset data = area_dataset(rng, 6, 80, 0.8);

  MembershipSpecConfig benchmark;
  benchmark.kind = MembershipKind::kChakravarty2019;
  benchmark.z2 = ParamValue::quantile(0.5);

  const std::vector<MembershipSpecConfig> same = {benchmark};
  const RankStabilityReport self_report = rank_stability(data, benchmark, same);
  REQUIRE(self_report.alternatives.size() == 1);
  CHECK(self_report.alternatives[0].tau == doctest::Approx(1.0));
  CHECK(self_report.alternatives[0].rho == doctest::Approx(1.0));

  // A slightly different level that keeps the ordering gives 1 as well.
  MembershipSpecConfig shifted = benchmark;
  shifted.z2 = ParamValue::quantile(0.52);
  const std::vector<MembershipSpecConfig> shifted_list = {shifted};
  const RankStabilityReport report = rank_stability(data, benchmark, shifted_list);
  CHECK(report.alternatives[0].tau == doctest::Approx(1.0));
  CHECK(report.alternatives[0].rho == doctest::Approx(1.0));
}

TEST_CASE("rank stability needs at least two areas") {
  Rng rng(101);
  const SurveyDataset data = area_dataset(rng, 1, 50);
  MembershipSpecConfig benchmark;
  benchmark.kind = MembershipKind::kChakravarty2019;
  benchmark.z2 = ParamValue::quantile(0.5);
  CHECK_THROWS_WITH_AS(rank_stability(data, benchmark, {}),
                       doctest::Contains("TooFewAreas"), ValidationError);
}
