#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fuzzypov/membership.hpp"
#include "fuzzypov/survey_data.hpp"

namespace fuzzypov {

enum class ResamplingMethod { kBootstrap, kJackknife };
std::string to_string(ResamplingMethod method);
ResamplingMethod resampling_method_from_string(const std::string& name);

// Variance-sum factor g_(hi): "rescaling" reuses the replicate-weight factor
// a_h/(a_h - 1); "classical" is the delete-one textbook rule (a_h - 1)/a_h.
enum class JackknifeGRule { kRescaling, kClassical };
std::string to_string(JackknifeGRule rule);
JackknifeGRule g_rule_from_string(const std::string& name);

enum class SingletonStratumPolicy { kCollapse, kError };

struct ReplicationPlan {
  ResamplingMethod method = ResamplingMethod::kBootstrap;
  int replicate_count = 500;  // bootstrap R
  std::uint64_t seed = 0;
  JackknifeGRule g_rule = JackknifeGRule::kRescaling;
  SingletonStratumPolicy singleton_policy = SingletonStratumPolicy::kCollapse;
  // Optional (1 - w_hi/w_h) multiplier on each jackknife term.
  bool unequal_probability_correction = false;
  // Stratum -> f_h; overrides the dataset's design values where present.
  std::map<std::string, double> finite_population_corrections;
  int jobs = 1;
};

// A replicate is a weight vector aligned with the dataset rows; a statistic
// sees the full sample under those weights. Bootstrap replicates encode
// resampled multiplicity times the original weight; jackknife replicates
// encode the delete-one-PSU rescaling.
using Statistic = std::function<double(std::span<const double> weights)>;

struct MseEstimate {
  double point = 0.0;
  double mse = 0.0;
  ResamplingMethod method = ResamplingMethod::kBootstrap;
  std::vector<double> replicate_values;
};

// Sample variance of the replicate values: sum (v - mean)^2 / (R - 1).
double replicate_variance(std::span<const double> values);

// With-replacement bootstrap of R replicates: observations under an SRS
// design, whole PSUs within each stratum under a complex design.
MseEstimate bootstrap_mse(const SurveyDataset& data, const Statistic& statistic,
                          const ReplicationPlan& plan);

// Frozen replicate weight vectors, one per bootstrap draw; replicate r is
// identical to the one bootstrap_mse evaluates under the same plan. Lets
// callers share common random numbers across many statistics.
std::vector<std::vector<double>> bootstrap_replicate_weights(const SurveyDataset& data,
                                                             const ReplicationPlan& plan);

struct JackknifeReplicate {
  std::string stratum;  // label after singleton collapsing
  std::string psu;
  std::vector<double> weights;
  double psu_weight_share = 0.0;  // w_hi / w_h under the original weights
};

// Delete-one-PSU replicates: deleted PSU zeroed, the rest of its stratum
// rescaled by a_h/(a_h - 1), everything else untouched. Strata with a single
// PSU are collapsed into the alphabetically adjacent stratum (or rejected).
std::vector<JackknifeReplicate> jackknife_replicates(
    const SurveyDataset& data,
    SingletonStratumPolicy policy = SingletonStratumPolicy::kCollapse);

// sum_h (1 - f_h) sum_i g_(hi) (S_(hi) - S_(h))^2 over the replicate values.
double jackknife_variance(const std::vector<JackknifeReplicate>& replicates,
                          std::span<const double> values, JackknifeGRule rule,
                          const std::map<std::string, double>& fpc,
                          bool unequal_probability_correction);

MseEstimate jackknife_mse(const SurveyDataset& data, const Statistic& statistic,
                          const ReplicationPlan& plan);

// Plan overrides first, then the dataset design, default 0.
std::map<std::string, double> effective_fpc(const SurveyDataset& data,
                                            const ReplicationPlan& plan);

struct StatisticOptions {
  // Re-solve alpha inside every replicate against the replicate's own
  // poverty line and head count ratio (distribution-based kinds only).
  bool recalibrate_alpha = false;
  // Refit the percentile triples inside every replicate.
  bool refit_zbm = false;
  int zbm_fit_rounds = 50;
  std::uint64_t zbm_seed = 0;
  // When set, distribution-based kinds evaluate against this fixed reference
  // distribution instead of recomputing it from the replicate weights; the
  // membership becomes a frozen function of income.
  std::shared_ptr<const DistributionContext> frozen_context;
};

// Wall-clock accounting for evaluate(): the distribution pass shared by all
// specs, and the per-spec membership loops.
struct EvalTiming {
  double shared_seconds = 0.0;
  std::vector<double> spec_seconds;
};

// Shared evaluation kernel: every (spec, domain) fuzzy index for one
// replicate weight vector, in one pass over the income-sorted sample.
// Distribution-based kinds recompute the national ECDF / Lorenz complement
// from the replicate weights; spec parameters stay fixed unless the options
// request recalibration. Both domain_statistic and the simulation harness
// evaluate through this kernel.
class BatchEvaluator {
 public:
  BatchEvaluator(const SurveyDataset& data, std::vector<MembershipSpec> specs,
                 std::vector<StatisticOptions> options = {});

  // Area labels in sorted order, then NATIONAL.
  const std::vector<std::string>& domains() const { return domain_labels_; }
  std::size_t spec_count() const { return specs_.size(); }

  // result[spec][domain]; NaN where the domain carries no replicate weight.
  std::vector<std::vector<double>> evaluate(std::span<const double> weights,
                                            EvalTiming* timing = nullptr) const;

 private:
  void slow_path_memberships(std::size_t spec_index, std::span<const double> weights,
                             std::vector<double>& mu) const;

  std::vector<MembershipSpec> specs_;
  std::vector<StatisticOptions> options_;
  std::vector<std::string> domain_labels_;
  std::vector<std::uint32_t> row_domain_;      // area index per row
  std::vector<std::uint32_t> order_;           // rows sorted by income
  std::vector<double> incomes_;
  std::vector<std::vector<double>> mu_fixed_;  // per spec; empty for dynamic kinds
  bool need_distribution_ = false;
  bool need_lorenz_ = false;
};

// Binds one membership spec and a target domain into a reusable statistic:
// replicate weights in, the domain's fuzzy index out.
Statistic domain_statistic(const SurveyDataset& data, const MembershipSpec& spec,
                           const std::string& domain, const StatisticOptions& options = {});

// Replicate-level export rows: method, domain, replicate_id, value.
void append_replicates_csv(std::string& out, const std::string& domain,
                           const MseEstimate& estimate);

}  // namespace fuzzypov
