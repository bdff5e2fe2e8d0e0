#pragma once

#include <span>
#include <string>
#include <vector>

#include "fuzzypov/membership.hpp"
#include "fuzzypov/resampling.hpp"
#include "fuzzypov/survey_data.hpp"

namespace fuzzypov {

// Parameter grid for the MSE surface of one membership kind. Threshold axes
// hold resolved incomes; only points with z2 >= z1 are admissible and the
// z1 == z2 boundary is emitted as a skipped marker row.
struct SweepGrid {
  MembershipKind kind = MembershipKind::kCerioliZani;
  std::vector<double> z1_values;
  std::vector<double> z2_values;
  std::vector<double> beta_values;  // only used by kinds with a shape parameter
};

struct SurfacePoint {
  double z1 = 0.0;
  double z2 = 0.0;
  double beta = 0.0;
  double estimate = 0.0;
  double mse = 0.0;
  bool skipped = false;
};

// National-level (estimate, MSE) at every admissible gridpoint. All points
// share one frozen set of bootstrap replicates so surface differences come
// from the parameters, not resampling noise.
std::vector<SurfacePoint> mse_surface(const SurveyDataset& data, const SweepGrid& grid,
                                      const ReplicationPlan& plan);

// Midranks (average rank for ties), 1-based.
std::vector<double> midranks(std::span<const double> values);

// Tie-corrected Kendall tau-b of two rank vectors.
double kendall_tau(std::span<const double> r1, std::span<const double> r2);

// Product-moment correlation of midranks.
double spearman_rho(std::span<const double> r1, std::span<const double> r2);

struct RankAlternative {
  MembershipSpecConfig params;
  double tau = 0.0;
  double rho = 0.0;
};

struct RankStabilityReport {
  MembershipSpecConfig benchmark;
  std::vector<RankAlternative> alternatives;
};

// Ranks areas by their estimated index under the benchmark parameters and
// under each alternative; reports the rank correlations per alternative.
RankStabilityReport rank_stability(const SurveyDataset& data,
                                   const MembershipSpecConfig& benchmark,
                                   std::span<const MembershipSpecConfig> alternatives);

}  // namespace fuzzypov
