#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fuzzypov/survey_data.hpp"

namespace fuzzypov {

// Columnar (income, weight) view of one estimation domain.
struct DomainData {
  std::vector<double> income;
  std::vector<double> weight;

  std::size_t size() const { return income.size(); }
};

DomainData domain_data(const SurveyDataset& data);
DomainData domain_data(const SurveyDataset& data, std::span<const std::uint32_t> rows);

// Weighted empirical CDF with the non-strict convention
// F(y) = sum{w_j : y_j <= y} / sum w_j, so F at the maximum income is 1.
class WeightedEcdf {
 public:
  double operator()(double income) const;

  std::span<const double> support() const { return support_; }
  std::span<const double> share() const { return share_; }

 private:
  friend WeightedEcdf weighted_ecdf(const DomainData&);
  std::vector<double> support_;  // sorted distinct incomes
  std::vector<double> share_;    // F at each support point, ends at 1
};

// Lorenz complement (1 - L)(y) = sum{w_j y_j : y_j > y} / sum w_j y_j,
// the share of total weighted income held strictly above y.
class LorenzComplement {
 public:
  double operator()(double income) const;

  std::span<const double> support() const { return support_; }
  std::span<const double> upper_share() const { return upper_share_; }

 private:
  friend LorenzComplement lorenz_complement(const DomainData&);
  std::vector<double> support_;
  std::vector<double> upper_share_;  // (1 - L) at each support point, ends at 0
};

WeightedEcdf weighted_ecdf(const DomainData& domain);
LorenzComplement lorenz_complement(const DomainData& domain);

// Lower (left-continuous) weighted quantile: smallest income with F(y) >= p.
double weighted_quantile(const DomainData& domain, double p);

// Batch version: sorts the domain once, then resolves every probability.
std::vector<double> weighted_quantiles(const DomainData& domain, std::span<const double> ps);

// Relative poverty line: 60% of the weighted median income.
double poverty_line(const DomainData& domain);

// Weighted share of units with income at or below the line.
double head_count_ratio(const DomainData& domain, double line);

// Weighted mean of a membership vector aligned with the domain rows.
double fuzzy_index(const DomainData& domain, std::span<const double> membership);

}  // namespace fuzzypov
