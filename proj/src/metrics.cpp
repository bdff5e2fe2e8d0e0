#include "fuzzypov/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/survey_data.hpp"

namespace fuzzypov {

double bias(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw ValidationError("EmptySequence: no estimates");
  double sum = 0.0;
  for (double e : estimates) sum += e - truth;
  return sum / static_cast<double>(estimates.size());
}

double cv(std::span<const double> estimates, std::span<const double> mse_estimates) {
  if (estimates.size() != mse_estimates.size())
    throw ValidationError("LengthMismatch: estimates and MSEs differ in length");
  if (estimates.empty()) throw ValidationError("EmptySequence: no estimates");
  double sum = 0.0;
  for (std::size_t t = 0; t < estimates.size(); ++t) {
    if (!(estimates[t] > 0.0))
      throw ValidationError("NonPositiveEstimate: replicate " + std::to_string(t));
    sum += std::sqrt(mse_estimates[t]) / estimates[t];
  }
  return sum / static_cast<double>(estimates.size());
}

double cv2(double cv_value) {
  if (!(cv_value >= 0.0)) throw ValidationError("NegativeCv");
  const double sq = cv_value * cv_value;
  return std::sqrt(sq / (1.0 + sq));
}

MseAggregates mse_aggregates(const std::vector<DomainReplicates>& domains,
                             std::span<const double> truth) {
  if (domains.empty()) throw ValidationError("need at least one domain");
  if (truth.size() != domains.size())
    throw ValidationError("LengthMismatch: one truth value per domain required");

  MseAggregates out;
  for (std::size_t j = 0; j < domains.size(); ++j) {
    const auto& d = domains[j];
    if (d.estimates.size() != d.mse_estimates.size())
      throw ValidationError("LengthMismatch: estimates and MSEs differ in length");
    if (d.estimates.size() < 2)
      throw ValidationError("TooFewReplicates: need at least two replicates");
    const auto T = static_cast<double>(d.estimates.size());
    double true_mse = 0.0;
    double estimated_mse = 0.0;
    for (std::size_t t = 0; t < d.estimates.size(); ++t) {
      const double dev = d.estimates[t] - truth[j];
      true_mse += dev * dev;
      estimated_mse += d.mse_estimates[t];
    }
    out.atmse += true_mse / T;
    out.aemse += estimated_mse / T;
  }
  const auto J = static_cast<double>(domains.size());
  out.atmse /= J;
  out.aemse /= J;
  // The per-domain true MSE is constant over replicates, so the MSE bias
  // reduces to this difference identically.
  out.bmse = out.aemse - out.atmse;
  return out;
}

MetricsReport make_metrics_report(const std::map<std::string, DomainReplicates>& per_domain,
                                  const std::map<std::string, double>& truth) {
  if (per_domain.empty()) throw ValidationError("need at least one domain");
  MetricsReport report;
  report.truth = truth;

  std::vector<DomainReplicates> aggregate_domains;
  std::vector<double> aggregate_truth;
  const bool has_subdomains =
      per_domain.size() > 1 || per_domain.begin()->first != kNationalDomain;

  for (const auto& [label, replicates] : per_domain) {
    const auto truth_it = truth.find(label);
    if (truth_it == truth.end())
      throw ValidationError("missing truth value for domain " + label);
    DomainMetrics m;
    m.bias = bias(replicates.estimates, truth_it->second);
    // A degenerate domain can produce a zero estimate in some replicate; its
    // CV is then undefined and reported as NaN rather than failing the study.
    const bool cv_defined =
        std::all_of(replicates.estimates.begin(), replicates.estimates.end(),
                    [](double e) { return e > 0.0; });
    if (cv_defined) {
      m.cv = cv(replicates.estimates, replicates.mse_estimates);
      m.cv2 = cv2(m.cv);
      m.publishable = publishable(m.cv);
    } else {
      m.cv = std::numeric_limits<double>::quiet_NaN();
      m.cv2 = std::numeric_limits<double>::quiet_NaN();
      m.publishable = false;
    }
    report.per_domain.emplace(label, m);
    report.replicate_count = static_cast<int>(replicates.estimates.size());
    // Aggregates average over the sub-domains; the synthetic national domain
    // only participates when it is the sole domain.
    if (!has_subdomains || label != kNationalDomain) {
      aggregate_domains.push_back(replicates);
      aggregate_truth.push_back(truth_it->second);
    }
  }
  report.aggregate = mse_aggregates(aggregate_domains, aggregate_truth);
  return report;
}

}  // namespace fuzzypov
