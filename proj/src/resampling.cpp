#include "fuzzypov/resampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/estimation.hpp"
#include "fuzzypov/rng.hpp"
#include "fuzzypov/util.hpp"

namespace fuzzypov {

std::string to_string(ResamplingMethod method) {
  return method == ResamplingMethod::kBootstrap ? "bootstrap" : "jackknife";
}

ResamplingMethod resampling_method_from_string(const std::string& name) {
  if (name == "bootstrap") return ResamplingMethod::kBootstrap;
  if (name == "jackknife") return ResamplingMethod::kJackknife;
  throw ValidationError("unknown resampling method: " + name);
}

std::string to_string(JackknifeGRule rule) {
  return rule == JackknifeGRule::kRescaling ? "rescaling" : "classical";
}

JackknifeGRule g_rule_from_string(const std::string& name) {
  if (name == "rescaling") return JackknifeGRule::kRescaling;
  if (name == "classical") return JackknifeGRule::kClassical;
  throw ValidationError("unknown jackknife g-rule: " + name + " (rescaling|classical)");
}

double replicate_variance(std::span<const double> values) {
  if (values.size() < 2) throw ValidationError("need at least two replicate values");
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); }))
    return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

namespace {

struct PsuGroup {
  std::string stratum;  // original label
  std::string psu;
  std::vector<std::uint32_t> rows;
};

struct StratumGroup {
  std::string label;
  std::vector<PsuGroup> psus;
};

// PSUs grouped by stratum, both levels in sorted label order.
std::vector<StratumGroup> group_by_stratum(const SurveyDataset& data) {
  std::map<std::string, std::map<std::string, std::vector<std::uint32_t>>> by_label;
  for (std::uint32_t i = 0; i < data.size(); ++i) {
    const Observation& obs = data.observations()[i];
    by_label[obs.stratum][obs.psu].push_back(i);
  }
  std::vector<StratumGroup> strata;
  strata.reserve(by_label.size());
  for (auto& [label, psus] : by_label) {
    StratumGroup group;
    group.label = label;
    for (auto& [psu, rows] : psus) group.psus.push_back({label, psu, std::move(rows)});
    strata.push_back(std::move(group));
  }
  return strata;
}

void warn_collapse_once(const std::string& from, const std::string& into) {
  static std::mutex mutex;
  static std::set<std::pair<std::string, std::string>> seen;
  std::lock_guard<std::mutex> lock(mutex);
  if (seen.emplace(from, into).second) {
    std::cerr << "warning: stratum '" << from << "' has a single PSU; collapsed into '"
              << into << "' for jackknife replication\n";
  }
}

// Merges single-PSU strata into the alphabetically adjacent stratum (the
// next label, or the previous one for the last stratum).
std::vector<StratumGroup> collapse_singletons(std::vector<StratumGroup> strata,
                                              SingletonStratumPolicy policy) {
  for (std::size_t h = 0; h < strata.size();) {
    if (strata[h].psus.size() >= 2) {
      ++h;
      continue;
    }
    if (policy == SingletonStratumPolicy::kError)
      throw ValidationError("SingletonStratum: " + strata[h].label);
    if (strata.size() == 1)
      throw ValidationError("SingletonStratum: " + strata[h].label +
                            " (no adjacent stratum to collapse into)");
    const std::size_t target = h + 1 < strata.size() ? h + 1 : h - 1;
    warn_collapse_once(strata[h].label, strata[target].label);
    auto& into = strata[target].psus;
    into.insert(into.end(), std::make_move_iterator(strata[h].psus.begin()),
                std::make_move_iterator(strata[h].psus.end()));
    strata.erase(strata.begin() + static_cast<std::ptrdiff_t>(h));
    if (h > 0 && target < h) h = target;  // re-check the enlarged predecessor
  }
  return strata;
}

std::vector<double> original_weights(const SurveyDataset& data) {
  std::vector<double> w;
  w.reserve(data.size());
  for (const Observation& obs : data.observations()) w.push_back(obs.weight);
  return w;
}

void fill_bootstrap_weights(const SurveyDataset& data,
                            const std::vector<StratumGroup>* strata, Rng& rng,
                            std::vector<double>& weights) {
  weights.assign(data.size(), 0.0);
  if (strata == nullptr) {
    // SRS: resample observations, each draw carrying its design weight.
    const std::size_t n = data.size();
    for (std::size_t m = 0; m < n; ++m) {
      const auto pick = static_cast<std::size_t>(rng.below(n));
      weights[pick] += data.observations()[pick].weight;
    }
  } else {
    // Complex: resample whole PSUs within each stratum.
    for (const StratumGroup& stratum : *strata) {
      const std::size_t a = stratum.psus.size();
      for (std::size_t draw = 0; draw < a; ++draw) {
        const auto pick = static_cast<std::size_t>(rng.below(a));
        for (std::uint32_t row : stratum.psus[pick].rows)
          weights[row] += data.observations()[row].weight;
      }
    }
  }
}

void check_bootstrap_plan(const ReplicationPlan& plan) {
  if (plan.method != ResamplingMethod::kBootstrap)
    throw ValidationError("BadPlan: plan method is not bootstrap");
  if (plan.replicate_count < 2)
    throw ValidationError("BadPlan: bootstrap needs at least 2 replicates");
}

}  // namespace

MseEstimate bootstrap_mse(const SurveyDataset& data, const Statistic& statistic,
                          const ReplicationPlan& plan) {
  check_bootstrap_plan(plan);
  const bool complex = data.design().kind == DesignKind::kComplex;
  const std::vector<StratumGroup> strata = complex ? group_by_stratum(data)
                                                   : std::vector<StratumGroup>{};

  MseEstimate estimate;
  estimate.method = ResamplingMethod::kBootstrap;
  estimate.point = statistic(original_weights(data));

  const auto replicates = static_cast<std::size_t>(plan.replicate_count);
  estimate.replicate_values.assign(replicates, 0.0);
  parallel_for(replicates, plan.jobs, [&](std::size_t r) {
    thread_local std::vector<double> weights;
    Rng rng(derive_seed(plan.seed, seed_stream::kBootstrap, r));
    fill_bootstrap_weights(data, complex ? &strata : nullptr, rng, weights);
    estimate.replicate_values[r] = statistic(weights);
  });
  estimate.mse = replicate_variance(estimate.replicate_values);
  return estimate;
}

std::vector<std::vector<double>> bootstrap_replicate_weights(const SurveyDataset& data,
                                                             const ReplicationPlan& plan) {
  check_bootstrap_plan(plan);
  const bool complex = data.design().kind == DesignKind::kComplex;
  const std::vector<StratumGroup> strata = complex ? group_by_stratum(data)
                                                   : std::vector<StratumGroup>{};
  std::vector<std::vector<double>> out(static_cast<std::size_t>(plan.replicate_count));
  for (std::size_t r = 0; r < out.size(); ++r) {
    Rng rng(derive_seed(plan.seed, seed_stream::kBootstrap, r));
    fill_bootstrap_weights(data, complex ? &strata : nullptr, rng, out[r]);
  }
  return out;
}

std::vector<JackknifeReplicate> jackknife_replicates(const SurveyDataset& data,
                                                     SingletonStratumPolicy policy) {
  if (data.design().kind != DesignKind::kComplex)
    throw ValidationError("jackknife requires a complex design with strata and PSUs");
  const std::vector<StratumGroup> strata = collapse_singletons(group_by_stratum(data), policy);
  const std::vector<double> base = original_weights(data);

  std::vector<JackknifeReplicate> replicates;
  for (const StratumGroup& stratum : strata) {
    const auto a = static_cast<double>(stratum.psus.size());
    const double rescale = a / (a - 1.0);
    double stratum_weight = 0.0;
    for (const PsuGroup& psu : stratum.psus)
      for (std::uint32_t row : psu.rows) stratum_weight += base[row];
    for (std::size_t drop = 0; drop < stratum.psus.size(); ++drop) {
      const PsuGroup& dropped = stratum.psus[drop];
      JackknifeReplicate rep;
      rep.stratum = stratum.label;
      // Qualify collapsed-in PSUs so labels stay unique within the stratum.
      rep.psu = dropped.stratum == stratum.label ? dropped.psu
                                                 : dropped.stratum + ":" + dropped.psu;
      rep.weights = base;
      double dropped_weight = 0.0;
      for (std::size_t i = 0; i < stratum.psus.size(); ++i) {
        for (std::uint32_t row : stratum.psus[i].rows) {
          if (i == drop) {
            dropped_weight += base[row];
            rep.weights[row] = 0.0;
          } else {
            rep.weights[row] *= rescale;
          }
        }
      }
      rep.psu_weight_share = stratum_weight > 0.0 ? dropped_weight / stratum_weight : 0.0;
      replicates.push_back(std::move(rep));
    }
  }
  return replicates;
}

double jackknife_variance(const std::vector<JackknifeReplicate>& replicates,
                          std::span<const double> values, JackknifeGRule rule,
                          const std::map<std::string, double>& fpc,
                          bool unequal_probability_correction) {
  if (values.size() != replicates.size())
    throw ValidationError("LengthMismatch: one value per jackknife replicate required");
  std::map<std::string, std::vector<std::size_t>> by_stratum;
  for (std::size_t r = 0; r < replicates.size(); ++r)
    by_stratum[replicates[r].stratum].push_back(r);

  double variance = 0.0;
  for (const auto& [label, members] : by_stratum) {
    const auto a = static_cast<double>(members.size());
    const double g = rule == JackknifeGRule::kRescaling ? a / (a - 1.0) : (a - 1.0) / a;
    if (std::all_of(members.begin(), members.end(),
                    [&](std::size_t r) { return values[r] == values[members.front()]; }))
      continue;
    double mean = 0.0;
    for (std::size_t r : members) mean += values[r];
    mean /= a;
    double sum = 0.0;
    for (std::size_t r : members) {
      const double dev = values[r] - mean;
      double term = g * dev * dev;
      if (unequal_probability_correction) term *= 1.0 - replicates[r].psu_weight_share;
      sum += term;
    }
    const auto it = fpc.find(label);
    const double f = it != fpc.end() ? it->second : 0.0;
    variance += (1.0 - f) * sum;
  }
  return variance;
}

std::map<std::string, double> effective_fpc(const SurveyDataset& data,
                                            const ReplicationPlan& plan) {
  std::map<std::string, double> fpc = data.design().finite_population_corrections;
  for (const auto& [stratum, f] : plan.finite_population_corrections) fpc[stratum] = f;
  for (const auto& [stratum, f] : fpc) {
    if (!(f >= 0.0 && f <= 1.0))
      throw ValidationError("finite population correction out of [0,1] for stratum " + stratum);
  }
  return fpc;
}

MseEstimate jackknife_mse(const SurveyDataset& data, const Statistic& statistic,
                          const ReplicationPlan& plan) {
  if (plan.method != ResamplingMethod::kJackknife)
    throw ValidationError("BadPlan: plan method is not jackknife");
  const std::vector<JackknifeReplicate> replicates =
      jackknife_replicates(data, plan.singleton_policy);

  MseEstimate estimate;
  estimate.method = ResamplingMethod::kJackknife;
  estimate.point = statistic(original_weights(data));
  estimate.replicate_values.assign(replicates.size(), 0.0);
  parallel_for(replicates.size(), plan.jobs, [&](std::size_t r) {
    estimate.replicate_values[r] = statistic(replicates[r].weights);
  });
  estimate.mse = jackknife_variance(replicates, estimate.replicate_values, plan.g_rule,
                                    effective_fpc(data, plan),
                                    plan.unequal_probability_correction);
  return estimate;
}

// --- BatchEvaluator --------------------------------------------------------

BatchEvaluator::BatchEvaluator(const SurveyDataset& data, std::vector<MembershipSpec> specs,
                               std::vector<StatisticOptions> options)
    : specs_(std::move(specs)), options_(std::move(options)) {
  if (options_.empty()) options_.resize(specs_.size());
  if (options_.size() != specs_.size())
    throw ValidationError("one StatisticOptions per spec required");
  for (const MembershipSpec& spec : specs_) spec.validate();

  const std::size_t n = data.size();
  incomes_.reserve(n);
  for (const Observation& obs : data.observations()) incomes_.push_back(obs.income);

  // Area ids in sorted label order; NATIONAL is appended last.
  std::map<std::string, std::uint32_t> area_ids;
  for (const Observation& obs : data.observations())
    area_ids.emplace(obs.area, 0);
  std::uint32_t next_id = 0;
  for (auto& [label, id] : area_ids) {
    id = next_id++;
    domain_labels_.push_back(label);
  }
  domain_labels_.push_back(kNationalDomain);
  row_domain_.reserve(n);
  for (const Observation& obs : data.observations())
    row_domain_.push_back(area_ids.at(obs.area));

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  std::stable_sort(order_.begin(), order_.end(), [this](std::uint32_t a, std::uint32_t b) {
    return incomes_[a] < incomes_[b];
  });

  mu_fixed_.resize(specs_.size());
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const MembershipSpec& spec = specs_[k];
    const StatisticOptions& opt = options_[k];
    if (is_distribution_based(spec.kind)) {
      if (opt.frozen_context) {
        // Frozen reference distribution: the membership is a fixed function.
        auto& mu = mu_fixed_[k];
        mu.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          switch (spec.kind) {
            case MembershipKind::kCheliLemmiTfr:
              mu[i] = eval_tfr(incomes_[i], opt.frozen_context->ecdf, *spec.alpha);
              break;
            case MembershipKind::kBettiVerma:
              mu[i] = eval_betti_verma(incomes_[i], opt.frozen_context->lorenz, *spec.alpha);
              break;
            default:
              mu[i] = eval_betti2006(incomes_[i], opt.frozen_context->ecdf,
                                     opt.frozen_context->lorenz, *spec.alpha);
              break;
          }
        }
      } else if (!opt.recalibrate_alpha) {
        need_distribution_ = true;
        if (spec.kind != MembershipKind::kCheliLemmiTfr) need_lorenz_ = true;
      }
      continue;
    }
    if (spec.kind == MembershipKind::kZediniBelhadj2015 && opt.refit_zbm) continue;
    // Income-only kinds: memberships never change across replicates.
    auto& mu = mu_fixed_[k];
    mu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = incomes_[i];
      switch (spec.kind) {
        case MembershipKind::kCerioliZani:
        case MembershipKind::kBelhadj2011:
          mu[i] = eval_trapezoidal(y, *spec.z1, *spec.z2);
          break;
        case MembershipKind::kBelhadj2014:
          mu[i] = eval_belhadj2014(y, *spec.z1, *spec.z2, *spec.beta);
          break;
        case MembershipKind::kChakravarty2019:
          mu[i] = eval_chakravarty(y, *spec.z2);
          break;
        case MembershipKind::kZediniBelhadj2015:
          mu[i] = eval_zbm(y, *spec.zbm);
          break;
        default:
          break;
      }
    }
  }
}

// Recalibrated or refit kinds rebuild their parameters from the replicate
// weights through the ordinary library surface; slower, but rarely enabled.
void BatchEvaluator::slow_path_memberships(std::size_t spec_index,
                                           std::span<const double> weights,
                                           std::vector<double>& mu) const {
  const MembershipSpec& spec = specs_[spec_index];
  const StatisticOptions& opt = options_[spec_index];
  DomainData replicate;
  replicate.income = incomes_;
  replicate.weight.assign(weights.begin(), weights.end());

  MembershipSpec adjusted = spec;
  if (spec.kind == MembershipKind::kZediniBelhadj2015) {
    adjusted.zbm = fit_zbm_params(replicate, opt.zbm_fit_rounds, opt.zbm_seed);
    const std::vector<double> val = evaluate_spec(replicate, adjusted, nullptr);
    mu.assign(val.begin(), val.end());
    return;
  }
  const DistributionContext context = make_distribution_context(replicate);
  const double line = poverty_line(replicate);
  const double target = head_count_ratio(replicate, line);
  adjusted.alpha = calibrate_alpha(replicate, spec.kind, target, &context);
  const std::vector<double> val = evaluate_spec(replicate, adjusted, &context);
  mu.assign(val.begin(), val.end());
}

std::vector<std::vector<double>> BatchEvaluator::evaluate(std::span<const double> weights,
                                                          EvalTiming* timing) const {
  using Clock = std::chrono::steady_clock;
  const std::size_t n = incomes_.size();
  if (weights.size() != n)
    throw ValidationError("LengthMismatch: weight vector does not match dataset");
  const std::size_t areas = domain_labels_.size() - 1;
  if (timing && timing->spec_seconds.size() != specs_.size())
    timing->spec_seconds.assign(specs_.size(), 0.0);
  const auto shared_start = Clock::now();

  double total_weight = 0.0;
  for (double w : weights) total_weight += w;
  if (!(total_weight > 0.0)) throw ValidationError("ZeroTotalWeight: replicate has no weight");

  std::vector<double> denom(areas, 0.0);
  for (std::size_t i = 0; i < n; ++i) denom[row_domain_[i]] += weights[i];

  // One pass over the income order gives 1 - F per row; a reverse pass gives
  // the income share strictly above each row.
  thread_local std::vector<double> one_minus_f;
  thread_local std::vector<double> upper_income_share;
  if (need_distribution_) {
    // Store the raw running weight per row first and normalise by the final
    // running value: partial sums of nonnegative terms never exceed their own
    // total, so 1 - F stays in [0, 1] and the top group lands on 0 exactly.
    one_minus_f.assign(n, 0.0);
    double cum = 0.0;
    for (std::size_t k = 0; k < n;) {
      std::size_t j = k;
      const double y = incomes_[order_[k]];
      double group_weight = 0.0;
      while (j < n && incomes_[order_[j]] == y) group_weight += weights[order_[j++]];
      cum += group_weight;
      for (std::size_t m = k; m < j; ++m) one_minus_f[order_[m]] = cum;
      k = j;
    }
    for (std::size_t i = 0; i < n; ++i) one_minus_f[i] = 1.0 - one_minus_f[i] / cum;
    if (need_lorenz_) {
      upper_income_share.assign(n, 0.0);
      double tail = 0.0;
      for (std::size_t k = n; k > 0;) {
        std::size_t j = k;  // group (begin, end] of equal incomes, scanned from the top
        const double y = incomes_[order_[k - 1]];
        double group_income = 0.0;
        while (j > 0 && incomes_[order_[j - 1]] == y) {
          --j;
          group_income += weights[order_[j]] * incomes_[order_[j]];
        }
        for (std::size_t m = j; m < k; ++m) upper_income_share[order_[m]] = tail;
        tail += group_income;
        k = j;
      }
      if (!(tail > 0.0)) throw ValidationError("ZeroTotalIncome: replicate has no income mass");
      for (std::size_t i = 0; i < n; ++i) upper_income_share[i] /= tail;
    }
  }

  if (timing)
    timing->shared_seconds += std::chrono::duration<double>(Clock::now() - shared_start).count();

  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> result(specs_.size());
  thread_local std::vector<double> slow_mu;
  for (std::size_t spec_index = 0; spec_index < specs_.size(); ++spec_index) {
    const auto spec_start = Clock::now();
    const MembershipSpec& spec = specs_[spec_index];
    const std::vector<double>* fixed =
        mu_fixed_[spec_index].empty() ? nullptr : &mu_fixed_[spec_index];
    const bool slow = !fixed && (options_[spec_index].recalibrate_alpha ||
                                 options_[spec_index].refit_zbm);
    if (slow) slow_path_memberships(spec_index, weights, slow_mu);

    const double alpha = spec.alpha.value_or(1.0);
    std::vector<double> numer(areas, 0.0);
    double national_numer = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights[i];
      if (w == 0.0) continue;
      double mu;
      if (fixed) {
        mu = (*fixed)[i];
      } else if (slow) {
        mu = slow_mu[i];
      } else {
        switch (spec.kind) {
          case MembershipKind::kCheliLemmiTfr:
            mu = std::pow(one_minus_f[i], alpha);
            break;
          case MembershipKind::kBettiVerma:
            mu = alpha == 1.0 ? 1.0 : std::pow(upper_income_share[i], alpha - 1.0);
            break;
          case MembershipKind::kBetti2006:
            mu = alpha == 1.0 ? upper_income_share[i]
                              : std::pow(one_minus_f[i], alpha - 1.0) * upper_income_share[i];
            break;
          default:
            throw ComputationError("unhandled membership kind in batch evaluation");
        }
      }
      const double wmu = w * mu;
      numer[row_domain_[i]] += wmu;
      national_numer += wmu;
    }

    auto& row = result[spec_index];
    row.resize(areas + 1);
    for (std::size_t j = 0; j < areas; ++j)
      row[j] = denom[j] > 0.0 ? numer[j] / denom[j] : kNan;
    row[areas] = national_numer / total_weight;
    if (timing)
      timing->spec_seconds[spec_index] +=
          std::chrono::duration<double>(Clock::now() - spec_start).count();
  }
  return result;
}

Statistic domain_statistic(const SurveyDataset& data, const MembershipSpec& spec,
                           const std::string& domain, const StatisticOptions& options) {
  auto evaluator = std::make_shared<BatchEvaluator>(data, std::vector<MembershipSpec>{spec},
                                                    std::vector<StatisticOptions>{options});
  const auto& labels = evaluator->domains();
  const auto it = std::find(labels.begin(), labels.end(), domain);
  if (it == labels.end()) throw ValidationError("UnknownDomain: " + domain);
  const auto index = static_cast<std::size_t>(it - labels.begin());
  std::string label = domain;
  return [evaluator, index, label](std::span<const double> weights) {
    const double value = evaluator->evaluate(weights)[0][index];
    if (std::isnan(value))
      throw ValidationError("EmptyEffectiveDomain: " + label + " has no replicate weight");
    return value;
  };
}

void append_replicates_csv(std::string& out, const std::string& domain,
                           const MseEstimate& estimate) {
  for (std::size_t r = 0; r < estimate.replicate_values.size(); ++r) {
    out += to_string(estimate.method);
    out += ',';
    out += domain;
    out += ',';
    out += std::to_string(r);
    out += ',';
    out += format_double(estimate.replicate_values[r]);
    out += '\n';
  }
}

}  // namespace fuzzypov
