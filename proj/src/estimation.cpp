#include "fuzzypov/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fuzzypov/errors.hpp"

namespace fuzzypov {

DomainData domain_data(const SurveyDataset& data) {
  DomainData d;
  d.income.reserve(data.size());
  d.weight.reserve(data.size());
  for (const Observation& obs : data.observations()) {
    d.income.push_back(obs.income);
    d.weight.push_back(obs.weight);
  }
  return d;
}

DomainData domain_data(const SurveyDataset& data, std::span<const std::uint32_t> rows) {
  DomainData d;
  d.income.reserve(rows.size());
  d.weight.reserve(rows.size());
  for (std::uint32_t i : rows) {
    const Observation& obs = data.observations()[i];
    d.income.push_back(obs.income);
    d.weight.push_back(obs.weight);
  }
  return d;
}

namespace {

// (income, weight) pairs sorted by income.
std::vector<std::pair<double, double>> sorted_pairs(const DomainData& d) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) pairs.emplace_back(d.income[i], d.weight[i]);
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return pairs;
}

double require_positive_total_weight(const DomainData& d) {
  const double total = std::accumulate(d.weight.begin(), d.weight.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("ZeroTotalWeight");
  return total;
}

}  // namespace

double WeightedEcdf::operator()(double income) const {
  // Largest support point <= income.
  auto it = std::upper_bound(support_.begin(), support_.end(), income);
  if (it == support_.begin()) return 0.0;
  return share_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

WeightedEcdf weighted_ecdf(const DomainData& domain) {
  if (domain.size() == 0) throw ValidationError("ZeroTotalWeight: empty domain");
  require_positive_total_weight(domain);
  const auto pairs = sorted_pairs(domain);

  WeightedEcdf ecdf;
  std::vector<double> cumulative;
  double cum = 0.0;
  for (std::size_t i = 0; i < pairs.size();) {
    const double income = pairs[i].first;
    double group_weight = 0.0;
    while (i < pairs.size() && pairs[i].first == income) group_weight += pairs[i++].second;
    cum += group_weight;
    ecdf.support_.push_back(income);
    cumulative.push_back(cum);
  }
  const double total = cumulative.back();
  ecdf.share_.reserve(cumulative.size());
  for (double c : cumulative) ecdf.share_.push_back(c / total);
  return ecdf;
}

double LorenzComplement::operator()(double income) const {
  // upper_share_[k] is the income share strictly above support_[k]; it also
  // covers any income in [support_[k], support_[k+1]).
  auto it = std::upper_bound(support_.begin(), support_.end(), income);
  if (it == support_.begin()) return 1.0;
  return upper_share_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

LorenzComplement lorenz_complement(const DomainData& domain) {
  if (domain.size() == 0) throw ValidationError("ZeroTotalIncome: empty domain");
  const auto pairs = sorted_pairs(domain);

  std::vector<double> support;
  std::vector<double> group_income;  // sum of w*y per distinct income
  for (std::size_t i = 0; i < pairs.size();) {
    const double income = pairs[i].first;
    double wy = 0.0;
    while (i < pairs.size() && pairs[i].first == income) {
      wy += pairs[i].second * pairs[i].first;
      ++i;
    }
    support.push_back(income);
    group_income.push_back(wy);
  }

  // Tail sums from the top so the share below the minimum is exactly 1.
  std::vector<double> tail(group_income.size() + 1, 0.0);
  for (std::size_t k = group_income.size(); k-- > 0;) tail[k] = tail[k + 1] + group_income[k];
  const double total_income = tail[0];
  if (!(total_income > 0.0)) throw ValidationError("ZeroTotalIncome");

  LorenzComplement lorenz;
  lorenz.support_ = std::move(support);
  lorenz.upper_share_.reserve(lorenz.support_.size());
  for (std::size_t k = 0; k < lorenz.support_.size(); ++k)
    lorenz.upper_share_.push_back(tail[k + 1] / total_income);
  return lorenz;
}

namespace {

struct GroupedIncomes {
  std::vector<double> income;      // distinct, ascending
  std::vector<double> cumulative;  // running weight, ends at the total
};

GroupedIncomes grouped_incomes(const DomainData& domain) {
  const auto pairs = sorted_pairs(domain);
  GroupedIncomes g;
  double cum = 0.0;
  for (std::size_t i = 0; i < pairs.size();) {
    const double income = pairs[i].first;
    while (i < pairs.size() && pairs[i].first == income) cum += pairs[i++].second;
    g.income.push_back(income);
    g.cumulative.push_back(cum);
  }
  return g;
}

// Smallest income whose cumulative share cum/total reaches p. Comparing on
// the share scale keeps equal-weight quantiles at k/n exactly on the k-th
// order statistic, since F takes the same value k/n there.
double quantile_from_groups(const GroupedIncomes& g, double p) {
  const double total = g.cumulative.back();
  auto it = std::lower_bound(g.cumulative.begin(), g.cumulative.end(), p,
                             [total](double cum, double prob) { return cum / total < prob; });
  if (it == g.cumulative.end()) --it;
  return g.income[static_cast<std::size_t>(it - g.cumulative.begin())];
}

}  // namespace

std::vector<double> weighted_quantiles(const DomainData& domain, std::span<const double> ps) {
  for (double p : ps)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("POutOfRange: p = " + std::to_string(p));
  if (domain.size() == 0) throw ValidationError("ZeroTotalWeight: empty domain");
  require_positive_total_weight(domain);

  const GroupedIncomes g = grouped_incomes(domain);
  std::vector<double> out;
  out.reserve(ps.size());
  for (double p : ps) out.push_back(quantile_from_groups(g, p));
  return out;
}

double weighted_quantile(const DomainData& domain, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("POutOfRange: p = " + std::to_string(p));
  if (domain.size() == 0) throw ValidationError("ZeroTotalWeight: empty domain");
  require_positive_total_weight(domain);
  return quantile_from_groups(grouped_incomes(domain), p);
}

double poverty_line(const DomainData& domain) {
  return 0.6 * weighted_quantile(domain, 0.5);
}

double head_count_ratio(const DomainData& domain, double line) {
  const double total = require_positive_total_weight(domain);
  double below = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i)
    if (domain.income[i] <= line) below += domain.weight[i];
  return below / total;
}

double fuzzy_index(const DomainData& domain, std::span<const double> membership) {
  if (membership.size() != domain.size())
    throw ValidationError("LengthMismatch: membership vector does not match domain");
  double numerator = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const double mu = membership[i];
    if (!(mu >= 0.0 && mu <= 1.0))
      throw ValidationError("MembershipOutOfRange: index " + std::to_string(i));
    numerator += mu * domain.weight[i];
    total += domain.weight[i];
  }
  if (!(total > 0.0)) throw ValidationError("ZeroTotalWeight");
  return numerator / total;
}

}  // namespace fuzzypov
