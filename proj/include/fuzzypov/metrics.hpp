#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace fuzzypov {

// Estimates with a CV above this are flagged as non-publishable.
inline constexpr double kPublicationCvLimit = 0.166;

inline bool publishable(double cv_value) { return cv_value <= kPublicationCvLimit; }

// Mean deviation of the replicate estimates from the true value.
double bias(std::span<const double> estimates, double truth);

// Mean over replicates of sqrt(mse_t) / estimate_t.
double cv(std::span<const double> estimates, std::span<const double> mse_estimates);

// Second-order coefficient of variation sqrt(cv^2 / (1 + cv^2)), bounded in [0, 1).
double cv2(double cv_value);

struct MseAggregates {
  double atmse = 0.0;  // average true MSE: Monte Carlo MSE averaged over domains
  double aemse = 0.0;  // average estimated MSE
  double bmse = 0.0;   // aemse - atmse
};

struct DomainReplicates {
  std::vector<double> estimates;      // one per Monte Carlo replicate
  std::vector<double> mse_estimates;  // matching resampling MSEs
};

MseAggregates mse_aggregates(const std::vector<DomainReplicates>& domains,
                             std::span<const double> truth);

struct DomainMetrics {
  double bias = 0.0;
  double cv = 0.0;
  double cv2 = 0.0;
  bool publishable = true;
};

struct MetricsReport {
  std::map<std::string, DomainMetrics> per_domain;
  MseAggregates aggregate;
  int replicate_count = 0;
  std::map<std::string, double> truth;
};

// Assembles the per-domain measures and aggregates for one estimator.
MetricsReport make_metrics_report(const std::map<std::string, DomainReplicates>& per_domain,
                                  const std::map<std::string, double>& truth);

}  // namespace fuzzypov
