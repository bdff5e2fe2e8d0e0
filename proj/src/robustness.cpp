#include "fuzzypov/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/estimation.hpp"

namespace fuzzypov {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool uses_beta(MembershipKind kind) { return kind == MembershipKind::kBelhadj2014; }

bool uses_lower_threshold(MembershipKind kind) {
  return kind != MembershipKind::kChakravarty2019;
}

// Builds the spec for one gridpoint, or nothing when the point violates the
// kind's threshold preconditions (the z1 == z2 boundary in particular).
std::optional<MembershipSpec> gridpoint_spec(MembershipKind kind, double z1, double z2,
                                             double beta) {
  MembershipSpec spec;
  spec.kind = kind;
  switch (kind) {
    case MembershipKind::kCerioliZani:
    case MembershipKind::kBelhadj2011:
      if (!(z1 < z2)) return std::nullopt;
      spec.z1 = z1;
      spec.z2 = z2;
      break;
    case MembershipKind::kBelhadj2014:
      if (!(0.0 < z1 && z1 < z2) || !(beta > 0.0)) return std::nullopt;
      spec.z1 = z1;
      spec.z2 = z2;
      spec.beta = beta;
      break;
    case MembershipKind::kChakravarty2019:
      if (!(z2 > 0.0)) return std::nullopt;
      spec.z2 = z2;
      break;
    default:
      throw ValidationError("mse_surface supports the threshold-parameterised kinds only");
  }
  return spec;
}

}  // namespace

std::vector<SurfacePoint> mse_surface(const SurveyDataset& data, const SweepGrid& grid,
                                      const ReplicationPlan& plan) {
  const std::vector<double> z1_axis =
      uses_lower_threshold(grid.kind) ? grid.z1_values : std::vector<double>{0.0};
  const std::vector<double> beta_axis = uses_beta(grid.kind) ? grid.beta_values
                                                             : std::vector<double>{kNan};
  if (z1_axis.empty() || grid.z2_values.empty() || beta_axis.empty())
    throw ValidationError("empty sweep grid");

  // Admissible points only (z2 >= z1); the z1 == z2 boundary stays as a marker.
  std::vector<SurfacePoint> points;
  std::vector<MembershipSpec> specs;
  std::vector<std::size_t> spec_of_point;
  for (double beta : beta_axis) {
    for (double z1 : z1_axis) {
      for (double z2 : grid.z2_values) {
        if (uses_lower_threshold(grid.kind) && z2 < z1) continue;
        SurfacePoint point;
        point.z1 = uses_lower_threshold(grid.kind) ? z1 : 0.0;
        point.z2 = z2;
        point.beta = beta;
        const auto spec = gridpoint_spec(grid.kind, z1, z2, beta);
        if (spec) {
          spec_of_point.push_back(specs.size());
          specs.push_back(*spec);
        } else {
          point.skipped = true;
          point.estimate = kNan;
          point.mse = kNan;
          spec_of_point.push_back(std::numeric_limits<std::size_t>::max());
        }
        points.push_back(point);
      }
    }
  }
  if (specs.empty()) throw ValidationError("sweep grid has no admissible points");

  const BatchEvaluator evaluator(data, specs);
  const std::size_t national = evaluator.domains().size() - 1;

  std::vector<double> base_weights;
  base_weights.reserve(data.size());
  for (const Observation& obs : data.observations()) base_weights.push_back(obs.weight);
  const auto point_values = evaluator.evaluate(base_weights);

  // One frozen replicate set shared by every gridpoint.
  std::vector<std::vector<double>> replicate_values(specs.size());
  if (plan.method == ResamplingMethod::kBootstrap) {
    const auto weight_sets = bootstrap_replicate_weights(data, plan);
    for (const auto& w : weight_sets) {
      const auto values = evaluator.evaluate(w);
      for (std::size_t s = 0; s < specs.size(); ++s)
        replicate_values[s].push_back(values[s][national]);
    }
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const double mse = replicate_variance(replicate_values[s]);
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (spec_of_point[p] != s) continue;
        points[p].estimate = point_values[s][national];
        points[p].mse = mse;
      }
    }
  } else {
    const auto replicates = jackknife_replicates(data, plan.singleton_policy);
    for (const auto& rep : replicates) {
      const auto values = evaluator.evaluate(rep.weights);
      for (std::size_t s = 0; s < specs.size(); ++s)
        replicate_values[s].push_back(values[s][national]);
    }
    const auto fpc = effective_fpc(data, plan);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const double mse = jackknife_variance(replicates, replicate_values[s], plan.g_rule, fpc,
                                            plan.unequal_probability_correction);
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (spec_of_point[p] != s) continue;
        points[p].estimate = point_values[s][national];
        points[p].mse = mse;
      }
    }
  }
  return points;
}

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  for (std::size_t k = 0; k < n;) {
    std::size_t j = k;
    while (j < n && values[order[j]] == values[order[k]]) ++j;
    const double rank = 0.5 * static_cast<double>(k + 1 + j);  // average of k+1 .. j
    for (std::size_t m = k; m < j; ++m) ranks[order[m]] = rank;
    k = j;
  }
  return ranks;
}

double kendall_tau(std::span<const double> r1, std::span<const double> r2) {
  if (r1.size() != r2.size()) throw ValidationError("LengthMismatch: rank vectors differ");
  const std::size_t n = r1.size();
  if (n < 2) throw ValidationError("need at least two ranks");

  double concordant = 0.0, discordant = 0.0, ties1 = 0.0, ties2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d1 = r1[i] - r1[j];
      const double d2 = r2[i] - r2[j];
      if (d1 == 0.0) ++ties1;
      if (d2 == 0.0) ++ties2;
      if (d1 != 0.0 && d2 != 0.0) {
        if (d1 * d2 > 0.0) ++concordant;
        else ++discordant;
      }
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double denom1 = pairs - ties1;
  const double denom2 = pairs - ties2;
  if (denom1 == 0.0 || denom2 == 0.0)
    throw ValidationError("DegenerateRanks: a rank vector is constant");
  return (concordant - discordant) / std::sqrt(denom1 * denom2);
}

double spearman_rho(std::span<const double> r1, std::span<const double> r2) {
  if (r1.size() != r2.size()) throw ValidationError("LengthMismatch: rank vectors differ");
  const std::size_t n = r1.size();
  if (n < 2) throw ValidationError("need at least two ranks");

  const std::vector<double> a = midranks(r1);
  const std::vector<double> b = midranks(r2);
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw ValidationError("DegenerateRanks: a rank vector is constant");
  return cov / std::sqrt(var_a * var_b);
}

RankStabilityReport rank_stability(const SurveyDataset& data,
                                   const MembershipSpecConfig& benchmark,
                                   std::span<const MembershipSpecConfig> alternatives) {
  const DomainPartition partition = partition_by_area(data);
  if (partition.domains.size() < 3)  // at least two areas plus NATIONAL
    throw ValidationError("TooFewAreas: rank stability needs at least two areas");

  const DomainData national = domain_data(data);
  const DistributionContext context = make_distribution_context(national);

  std::vector<MembershipSpec> specs;
  specs.push_back(benchmark.resolve(national, context, 0));
  for (const MembershipSpecConfig& alt : alternatives)
    specs.push_back(alt.resolve(national, context, 0));

  const BatchEvaluator evaluator(data, specs);
  std::vector<double> base_weights;
  base_weights.reserve(data.size());
  for (const Observation& obs : data.observations()) base_weights.push_back(obs.weight);
  const auto values = evaluator.evaluate(base_weights);

  const std::size_t area_count = evaluator.domains().size() - 1;
  const auto area_ranks = [&](std::size_t spec_index) {
    std::span<const double> estimates(values[spec_index].data(), area_count);
    return midranks(estimates);
  };

  RankStabilityReport report;
  report.benchmark = benchmark;
  const std::vector<double> benchmark_ranks = area_ranks(0);
  for (std::size_t alt = 0; alt < alternatives.size(); ++alt) {
    const std::vector<double> ranks = area_ranks(alt + 1);
    RankAlternative entry;
    entry.params = alternatives[alt];
    entry.tau = kendall_tau(benchmark_ranks, ranks);
    entry.rho = spearman_rho(benchmark_ranks, ranks);
    report.alternatives.push_back(std::move(entry));
  }
  return report;
}

}  // namespace fuzzypov
