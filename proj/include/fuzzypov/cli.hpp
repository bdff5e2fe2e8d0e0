#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fuzzypov/membership.hpp"
#include "fuzzypov/resampling.hpp"
#include "fuzzypov/simulation.hpp"
#include "fuzzypov/survey_data.hpp"

namespace fuzzypov::cli {

struct RobustnessConfig {
  std::vector<MembershipKind> kinds = {MembershipKind::kBelhadj2014,
                                       MembershipKind::kCerioliZani,
                                       MembershipKind::kChakravarty2019};
  std::vector<double> z1_quantiles = {0.01, 0.03, 0.05, 0.07, 0.09};
  std::vector<double> z2_quantiles = {0.91, 0.93, 0.95, 0.97, 0.99};
  std::vector<double> chakravarty_quantiles = {0.30, 0.35, 0.40, 0.45, 0.50,
                                               0.55, 0.60, 0.65, 0.70, 0.75};
  std::vector<double> betas = {1.0, 2.0, 4.0, 10.0};
  // Rank sweep: symmetric quantile pairs (p, 1-p) for threshold kinds and a
  // beta ladder for the flex-point kind.
  std::vector<double> rank_pair_quantiles = {0.02, 0.03, 0.04, 0.05, 0.06,
                                             0.07, 0.08, 0.09, 0.10};
  std::vector<double> rank_betas = {1, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct RunConfig {
  std::string subcommand;  // estimate | simulate | robustness
  std::string input_path;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;  // drawn and echoed when absent
  int jobs = 1;

  CsvSchema schema;
  std::vector<MembershipSpecConfig> kinds;  // empty: all seven defaults
  std::string method = "bootstrap";         // bootstrap | jackknife | both | none
  int replicates = 500;                     // bootstrap R
  JackknifeGRule g_rule = JackknifeGRule::kRescaling;
  SingletonStratumPolicy singleton_policy = SingletonStratumPolicy::kCollapse;
  std::map<std::string, double> fpc;        // stratum -> f_h for the variance formulas
  bool per_domain_recalibration = false;
  double publication_cv_limit = 0.166;
  bool dump_replicates = false;

  // simulate
  PopulationConfig population;  // empty areas: bundled nine-region default
  std::string scenario = "srs";
  int monte_carlo_replicates = 500;  // T
  int srs_sample_size = 821;
  std::map<std::string, int> households_per_area;  // empty: scenario default
  bool zbm_refit_per_sample = true;
  bool population_basis = false;  // freeze distribution kinds at the population

  RobustnessConfig robustness;
};

// JSON round-trip used for --config files and manifests.
RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& config);

// Fills defaults that must be explicit in the manifest (seed, kind list).
void finalize_config(RunConfig& config);

int cmd_estimate(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_robustness(const RunConfig& config);

// Dispatches on config.subcommand; returns the process exit code
// (0 success, 2 invalid input or configuration, 1 internal error).
int run(RunConfig config);

}  // namespace fuzzypov::cli
