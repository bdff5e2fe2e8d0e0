#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fuzzypov/membership.hpp"
#include "fuzzypov/metrics.hpp"
#include "fuzzypov/resampling.hpp"
#include "fuzzypov/survey_data.hpp"

namespace fuzzypov {

struct AreaConfig {
  std::string label;
  int population_size = 0;  // persons
  double log_mean = 10.0;   // location of the log-normal income model
  double log_sd = 0.5;      // scale, > 0
  // Relative frequencies of household sizes 1..6.
  std::vector<double> household_size_weights = {0.37, 0.30, 0.14, 0.12, 0.05, 0.02};
};

struct PopulationConfig {
  std::vector<AreaConfig> areas;
  std::uint64_t seed = 0;
};

// Nine-region default totalling 85057 persons.
PopulationConfig default_population_config();

// Synthetic population: households of 1..6 members sharing a log-normal
// equivalised income; every person carries weight 1.
SurveyDataset generate_population(const PopulationConfig& config);

// Simple random sample of persons without replacement; weights N/n.
SurveyDataset draw_srs(const SurveyDataset& population, int sample_size, std::uint64_t seed);

// Stratified household sample: within each area, a simple random sample of
// households without replacement; whole households enter the sample with
// weight (households in stratum) / (households sampled).
SurveyDataset draw_complex(const SurveyDataset& population,
                           const std::map<std::string, int>& households_per_area,
                           std::uint64_t seed);

struct ScenarioConfig {
  DesignKind kind = DesignKind::kSrs;
  int srs_sample_size = 821;
  std::map<std::string, int> households_per_area;  // complex scenario
  int replicate_count = 500;                       // Monte Carlo T
  std::vector<ResamplingMethod> methods;           // empty: point estimates only
  ReplicationPlan plan;                            // R, g-rule, fpc; seed derived per replicate
  bool zbm_refit_per_sample = true;                // re-estimate triples on each sample
  int zbm_sample_fit_rounds = 50;
  // Freeze the distribution-based memberships at the population ECDF/Lorenz
  // instead of re-estimating them from each sample; makes those estimators
  // plain means of a fixed function.
  bool population_distribution_basis = false;
  int jobs = 1;
};

// Households per area matching the default complex scenario's expected
// person counts under the default household-size mix.
std::map<std::string, int> default_households_per_area();

struct MethodTiming {
  double seconds = 0.0;
  long replicate_evaluations = 0;
};

struct KindResult {
  MembershipSpec spec;  // population-resolved parameters
  std::map<std::string, double> truth;
  std::map<std::string, double> bias;
  std::map<std::string, double> mc_sd;   // sd of the T estimates
  std::map<std::string, double> mc_mse;  // mean squared deviation from truth
  double atmse = 0.0;                    // mc_mse averaged over area domains

  struct MethodResult {
    MetricsReport report;
    std::map<std::string, double> aemse_by_domain;
    MethodTiming timing;
  };
  std::map<ResamplingMethod, MethodResult> methods;
  double point_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> domains;  // ascending realized mean size, NATIONAL last
  std::map<std::string, double> mean_sample_size;
  std::vector<MembershipKind> kind_order;
  std::map<MembershipKind, KindResult> kinds;
  int replicate_count = 0;
  std::uint64_t master_seed = 0;
  // Seconds spent rebuilding the replicate distribution (shared across the
  // distribution-based kinds), per phase.
  double point_shared_seconds = 0.0;
  std::map<ResamplingMethod, double> method_shared_seconds;
};

// Full Monte Carlo study: truth on the population, T sample draws, per-domain
// estimates and MSEs under the configured resampling methods.
ExperimentResult run_experiment(const SurveyDataset& population, const ScenarioConfig& scenario,
                                const std::vector<MembershipSpecConfig>& specs,
                                std::uint64_t master_seed);

}  // namespace fuzzypov
