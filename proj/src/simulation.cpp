#include "fuzzypov/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/estimation.hpp"
#include "fuzzypov/rng.hpp"
#include "fuzzypov/util.hpp"

namespace fuzzypov {

PopulationConfig default_population_config() {
  PopulationConfig config;
  config.areas = {
      {"Burgenland", 2905, 9.96, 0.52, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Carinthia", 5546, 9.92, 0.55, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Lower Austria", 16232, 10.00, 0.50, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Salzburg", 14262, 10.05, 0.48, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Styria", 5344, 9.94, 0.56, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Tyrol", 12107, 10.02, 0.51, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Upper Austria", 7219, 9.98, 0.53, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Vienna", 17686, 10.08, 0.58, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
      {"Vorarlberg", 3756, 10.01, 0.49, {0.37, 0.30, 0.14, 0.12, 0.05, 0.02}},
  };
  return config;
}

std::map<std::string, int> default_households_per_area() {
  return {{"Burgenland", 3},    {"Carinthia", 25},     {"Lower Austria", 70},
          {"Salzburg", 55},     {"Styria", 21},        {"Tyrol", 57},
          {"Upper Austria", 45},{"Vienna", 83},        {"Vorarlberg", 2}};
}

namespace {

void validate_area(const AreaConfig& area) {
  if (area.label.empty()) throw ValidationError("BadConfig: area without a label");
  if (area.population_size < 1)
    throw ValidationError("BadConfig: area " + area.label + " needs a positive population");
  if (!(area.log_sd >= 0.0) || !std::isfinite(area.log_mean))
    throw ValidationError("BadConfig: bad income model for area " + area.label);
  if (area.household_size_weights.empty() || area.household_size_weights.size() > 6)
    throw ValidationError("BadConfig: household sizes must cover 1..6 for area " + area.label);
  double total = 0.0;
  for (double w : area.household_size_weights) {
    if (!(w >= 0.0)) throw ValidationError("BadConfig: negative household-size weight");
    total += w;
  }
  if (!(total > 0.0))
    throw ValidationError("BadConfig: household-size weights all zero for area " + area.label);
}

int draw_household_size(const AreaConfig& area, Rng& rng) {
  double total = 0.0;
  for (double w : area.household_size_weights) total += w;
  double u = rng.next_double() * total;
  for (std::size_t s = 0; s < area.household_size_weights.size(); ++s) {
    u -= area.household_size_weights[s];
    if (u < 0.0) return static_cast<int>(s) + 1;
  }
  return static_cast<int>(area.household_size_weights.size());
}

}  // namespace

SurveyDataset generate_population(const PopulationConfig& config) {
  if (config.areas.empty()) throw ValidationError("BadConfig: no areas configured");
  std::vector<Observation> observations;
  for (std::size_t a = 0; a < config.areas.size(); ++a) {
    const AreaConfig& area = config.areas[a];
    validate_area(area);
    Rng rng(derive_seed(config.seed, seed_stream::kPopulation, a));
    int remaining = area.population_size;
    int household = 0;
    while (remaining > 0) {
      const int size = std::min(draw_household_size(area, rng), remaining);
      const double income = std::exp(area.log_mean + area.log_sd * rng.next_normal());
      const std::string household_id = area.label + "-h" + std::to_string(household);
      for (int member = 0; member < size; ++member) {
        Observation obs;
        obs.unit_id = household_id + "-p" + std::to_string(member);
        obs.household_id = household_id;
        obs.stratum = area.label;
        obs.psu = household_id;
        obs.area = area.label;
        obs.weight = 1.0;
        obs.income = income;
        observations.push_back(std::move(obs));
      }
      remaining -= size;
      ++household;
    }
  }
  DesignInfo design;
  design.kind = DesignKind::kComplex;  // population carries full frame information
  return SurveyDataset(std::move(observations), design);
}

SurveyDataset draw_srs(const SurveyDataset& population, int sample_size, std::uint64_t seed) {
  const auto population_size = static_cast<int>(population.size());
  if (sample_size < 1) throw ValidationError("SampleTooLarge: sample size must be positive");
  if (sample_size > population_size)
    throw ValidationError("SampleTooLarge: " + std::to_string(sample_size) + " > " +
                          std::to_string(population_size));

  std::vector<std::uint32_t> indices(population.size());
  std::iota(indices.begin(), indices.end(), 0u);
  Rng rng(seed);
  for (int k = 0; k < sample_size; ++k) {
    const auto j = static_cast<std::size_t>(k) +
                   static_cast<std::size_t>(rng.below(population.size() - static_cast<std::size_t>(k)));
    std::swap(indices[static_cast<std::size_t>(k)], indices[j]);
  }
  indices.resize(static_cast<std::size_t>(sample_size));
  std::sort(indices.begin(), indices.end());

  const double weight = static_cast<double>(population_size) / sample_size;
  std::vector<Observation> observations;
  observations.reserve(indices.size());
  for (std::uint32_t i : indices) {
    Observation obs = population.observations()[i];
    obs.weight = weight;
    observations.push_back(std::move(obs));
  }
  DesignInfo design;
  design.kind = DesignKind::kSrs;
  return SurveyDataset(std::move(observations), design);
}

SurveyDataset draw_complex(const SurveyDataset& population,
                           const std::map<std::string, int>& households_per_area,
                           std::uint64_t seed) {
  // Household lists per area, in frame order.
  std::map<std::string, std::vector<std::string>> households;
  std::map<std::string, std::map<std::string, std::vector<std::uint32_t>>> members;
  for (std::uint32_t i = 0; i < population.size(); ++i) {
    const Observation& obs = population.observations()[i];
    auto& rows = members[obs.area][obs.household_id];
    if (rows.empty()) households[obs.area].push_back(obs.household_id);
    rows.push_back(i);
  }

  std::vector<std::uint32_t> selected_rows;
  std::map<std::string, double> household_weight;
  std::size_t area_index = 0;
  for (const auto& [area, ids] : households) {
    const auto it = households_per_area.find(area);
    if (it == households_per_area.end())
      throw ValidationError("BadConfig: no household count for area " + area);
    const int want = it->second;
    const auto available = static_cast<int>(ids.size());
    if (want < 1 || want > available)
      throw ValidationError("SampleTooLarge: area " + area + " has " +
                            std::to_string(available) + " households, requested " +
                            std::to_string(want));

    std::vector<std::uint32_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(seed, seed_stream::kSampleDraw, area_index++));
    for (int k = 0; k < want; ++k) {
      const auto j = static_cast<std::size_t>(k) +
                     static_cast<std::size_t>(rng.below(order.size() - static_cast<std::size_t>(k)));
      std::swap(order[static_cast<std::size_t>(k)], order[j]);
    }
    const double weight = static_cast<double>(available) / want;
    for (int k = 0; k < want; ++k) {
      const std::string& id = ids[order[static_cast<std::size_t>(k)]];
      household_weight[id] = weight;
      for (std::uint32_t row : members[area][id]) selected_rows.push_back(row);
    }
  }
  std::sort(selected_rows.begin(), selected_rows.end());

  std::vector<Observation> observations;
  observations.reserve(selected_rows.size());
  for (std::uint32_t i : selected_rows) {
    Observation obs = population.observations()[i];
    obs.weight = household_weight.at(obs.household_id);
    observations.push_back(std::move(obs));
  }
  DesignInfo design;
  design.kind = DesignKind::kComplex;
  return SurveyDataset(std::move(observations), design);
}

namespace {

struct ReplicateOutcome {
  // [kind][domain]: estimate under the original sample weights
  std::vector<std::vector<double>> point;
  // [method][kind][domain]
  std::map<ResamplingMethod, std::vector<std::vector<double>>> mse;
  std::vector<double> domain_size;  // persons per domain in this sample
  EvalTiming point_timing;
  std::map<ResamplingMethod, EvalTiming> method_timing;
  std::map<ResamplingMethod, long> method_evaluations;
};

}  // namespace

ExperimentResult run_experiment(const SurveyDataset& population, const ScenarioConfig& scenario,
                                const std::vector<MembershipSpecConfig>& specs,
                                std::uint64_t master_seed) {
  if (scenario.replicate_count < 2)
    throw ValidationError("BadConfig: need at least two Monte Carlo replicates");
  if (specs.empty()) throw ValidationError("BadConfig: no membership kinds configured");
  for (ResamplingMethod method : scenario.methods) {
    if (method == ResamplingMethod::kJackknife && scenario.kind != DesignKind::kComplex)
      throw ValidationError("jackknife is designed for complex designs; use bootstrap under SRS");
  }

  const DomainData population_data = domain_data(population);
  const auto population_context =
      std::make_shared<DistributionContext>(make_distribution_context(population_data));

  // Resolve every kind's parameters against the population.
  std::vector<MembershipSpec> resolved;
  std::vector<MembershipKind> kind_order;
  std::vector<StatisticOptions> options(specs.size());
  resolved.reserve(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    resolved.push_back(specs[k].resolve(population_data, *population_context,
                                        derive_seed(master_seed, seed_stream::kSpecResolve, k)));
    kind_order.push_back(specs[k].kind);
    if (scenario.population_distribution_basis && is_distribution_based(specs[k].kind))
      options[k].frozen_context = population_context;
    for (std::size_t other = 0; other < k; ++other) {
      if (kind_order[other] == kind_order[k])
        throw ValidationError("BadConfig: duplicate membership kind " +
                              to_string(kind_order[k]));
    }
  }

  // Truth per kind and domain on the population.
  const DomainPartition partition = partition_by_area(population);
  std::vector<std::string> area_labels;
  for (const auto& [label, rows] : partition.domains)
    if (label != kNationalDomain) area_labels.push_back(label);
  std::vector<std::string> all_domains = area_labels;
  all_domains.push_back(kNationalDomain);
  const std::size_t domain_count = all_domains.size();

  std::vector<std::map<std::string, double>> truth(resolved.size());
  for (std::size_t k = 0; k < resolved.size(); ++k) {
    const std::vector<double> mu =
        evaluate_spec(population_data, resolved[k], population_context.get());
    for (const auto& [label, rows] : partition.domains) {
      double numer = 0.0;
      double denom = 0.0;
      for (std::uint32_t i : rows) {
        numer += mu[i] * population_data.weight[i];
        denom += population_data.weight[i];
      }
      truth[k][label] = numer / denom;
    }
  }

  const auto T = static_cast<std::size_t>(scenario.replicate_count);
  std::vector<ReplicateOutcome> outcomes(T);

  parallel_for(T, scenario.jobs, [&](std::size_t t) {
    const SurveyDataset sample =
        scenario.kind == DesignKind::kSrs
            ? draw_srs(population, scenario.srs_sample_size,
                       derive_seed(master_seed, seed_stream::kSampleDraw, t))
            : draw_complex(population,
                           scenario.households_per_area.empty() ? default_households_per_area()
                                                                : scenario.households_per_area,
                           derive_seed(master_seed, seed_stream::kSampleDraw, t));

    std::vector<MembershipSpec> sample_specs = resolved;
    if (scenario.zbm_refit_per_sample) {
      const DomainData sample_data = domain_data(sample);
      for (std::size_t k = 0; k < sample_specs.size(); ++k) {
        if (sample_specs[k].kind == MembershipKind::kZediniBelhadj2015) {
          sample_specs[k].zbm =
              fit_zbm_params(sample_data, scenario.zbm_sample_fit_rounds,
                             derive_seed(master_seed, seed_stream::kZbmSampleRefit, t));
        }
      }
    }

    const BatchEvaluator evaluator(sample, sample_specs, options);

    // Sample domain index -> experiment domain index.
    const auto& sample_domains = evaluator.domains();
    std::vector<std::size_t> slot(domain_count);
    for (std::size_t d = 0; d < domain_count; ++d) {
      const auto it =
          std::find(sample_domains.begin(), sample_domains.end(), all_domains[d]);
      if (it == sample_domains.end())
        throw ValidationError("domain " + all_domains[d] +
                              " not represented in a Monte Carlo sample; enlarge the sample");
      slot[d] = static_cast<std::size_t>(it - sample_domains.begin());
    }

    ReplicateOutcome& outcome = outcomes[t];
    outcome.domain_size.assign(domain_count, 0.0);
    for (const Observation& obs : sample.observations()) {
      const auto it = std::find(area_labels.begin(), area_labels.end(), obs.area);
      outcome.domain_size[static_cast<std::size_t>(it - area_labels.begin())] += 1.0;
      outcome.domain_size[domain_count - 1] += 1.0;
    }

    std::vector<double> base_weights;
    base_weights.reserve(sample.size());
    for (const Observation& obs : sample.observations()) base_weights.push_back(obs.weight);

    const auto remap = [&](const std::vector<std::vector<double>>& values) {
      std::vector<std::vector<double>> out(values.size());
      for (std::size_t k = 0; k < values.size(); ++k) {
        out[k].resize(domain_count);
        for (std::size_t d = 0; d < domain_count; ++d) {
          const double v = values[k][slot[d]];
          if (std::isnan(v))
            throw ValidationError("EmptyEffectiveDomain: " + all_domains[d] +
                                  " received no weight in a replicate");
          out[k][d] = v;
        }
      }
      return out;
    };

    outcome.point = remap(evaluator.evaluate(base_weights, &outcome.point_timing));

    for (ResamplingMethod method : scenario.methods) {
      ReplicationPlan plan = scenario.plan;
      plan.method = method;
      plan.seed = derive_seed(master_seed, seed_stream::kReplicateMse, t);
      plan.jobs = 1;
      EvalTiming& timing = outcome.method_timing[method];

      // values[replicate][kind][domain]
      std::vector<std::vector<std::vector<double>>> values;
      std::vector<JackknifeReplicate> jack;
      if (method == ResamplingMethod::kBootstrap) {
        const auto weight_sets = bootstrap_replicate_weights(sample, plan);
        values.reserve(weight_sets.size());
        for (const auto& w : weight_sets)
          values.push_back(remap(evaluator.evaluate(w, &timing)));
      } else {
        jack = jackknife_replicates(sample, plan.singleton_policy);
        values.reserve(jack.size());
        for (const auto& rep : jack)
          values.push_back(remap(evaluator.evaluate(rep.weights, &timing)));
      }
      outcome.method_evaluations[method] = static_cast<long>(values.size());

      auto& mse = outcome.mse[method];
      mse.assign(resolved.size(), std::vector<double>(domain_count, 0.0));
      std::vector<double> series(values.size());
      const std::map<std::string, double> fpc = effective_fpc(sample, plan);
      for (std::size_t k = 0; k < resolved.size(); ++k) {
        for (std::size_t d = 0; d < domain_count; ++d) {
          for (std::size_t r = 0; r < values.size(); ++r) series[r] = values[r][k][d];
          mse[k][d] = method == ResamplingMethod::kBootstrap
                          ? replicate_variance(series)
                          : jackknife_variance(jack, series, plan.g_rule, fpc,
                                               plan.unequal_probability_correction);
        }
      }
    }
  });

  // --- Assemble ---
  ExperimentResult result;
  result.replicate_count = scenario.replicate_count;
  result.master_seed = master_seed;
  result.kind_order = kind_order;

  std::vector<double> mean_size(domain_count, 0.0);
  for (const ReplicateOutcome& outcome : outcomes)
    for (std::size_t d = 0; d < domain_count; ++d) mean_size[d] += outcome.domain_size[d];
  for (double& s : mean_size) s /= static_cast<double>(T);

  std::vector<std::size_t> domain_rank(domain_count - 1);
  std::iota(domain_rank.begin(), domain_rank.end(), 0u);
  std::sort(domain_rank.begin(), domain_rank.end(), [&](std::size_t a, std::size_t b) {
    if (mean_size[a] != mean_size[b]) return mean_size[a] < mean_size[b];
    return all_domains[a] < all_domains[b];
  });
  for (std::size_t d : domain_rank) {
    result.domains.push_back(all_domains[d]);
    result.mean_sample_size[all_domains[d]] = mean_size[d];
  }
  result.domains.push_back(kNationalDomain);
  result.mean_sample_size[kNationalDomain] = mean_size[domain_count - 1];

  for (std::size_t k = 0; k < resolved.size(); ++k) {
    KindResult kind_result;
    kind_result.spec = resolved[k];
    kind_result.truth = truth[k];
    kind_result.point_seconds = 0.0;

    std::map<std::string, DomainReplicates> replicates_by_domain;
    for (std::size_t d = 0; d < domain_count; ++d) {
      const std::string& label = all_domains[d];
      std::vector<double> estimates(T);
      for (std::size_t t = 0; t < T; ++t) estimates[t] = outcomes[t].point[k][d];

      const double truth_value = truth[k].at(label);
      kind_result.bias[label] = bias(estimates, truth_value);
      double ss = 0.0;
      double mc_mse = 0.0;
      const double mean =
          std::accumulate(estimates.begin(), estimates.end(), 0.0) / static_cast<double>(T);
      for (double e : estimates) {
        ss += (e - mean) * (e - mean);
        mc_mse += (e - truth_value) * (e - truth_value);
      }
      kind_result.mc_sd[label] = std::sqrt(ss / static_cast<double>(T - 1));
      kind_result.mc_mse[label] = mc_mse / static_cast<double>(T);

      DomainReplicates reps;
      reps.estimates = std::move(estimates);
      replicates_by_domain.emplace(label, std::move(reps));
    }
    double atmse = 0.0;
    for (const std::string& label : area_labels) atmse += kind_result.mc_mse[label];
    kind_result.atmse = atmse / static_cast<double>(area_labels.size());

    for (ResamplingMethod method : scenario.methods) {
      auto with_mse = replicates_by_domain;
      KindResult::MethodResult method_result;
      for (std::size_t d = 0; d < domain_count; ++d) {
        const std::string& label = all_domains[d];
        auto& reps = with_mse.at(label);
        reps.mse_estimates.resize(T);
        double sum = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          reps.mse_estimates[t] = outcomes[t].mse.at(method)[k][d];
          sum += reps.mse_estimates[t];
        }
        method_result.aemse_by_domain[label] = sum / static_cast<double>(T);
      }
      method_result.report = make_metrics_report(with_mse, truth[k]);
      for (const ReplicateOutcome& outcome : outcomes) {
        const auto timing_it = outcome.method_timing.find(method);
        if (timing_it != outcome.method_timing.end() &&
            k < timing_it->second.spec_seconds.size())
          method_result.timing.seconds += timing_it->second.spec_seconds[k];
        const auto evals_it = outcome.method_evaluations.find(method);
        if (evals_it != outcome.method_evaluations.end())
          method_result.timing.replicate_evaluations += evals_it->second;
      }
      kind_result.methods.emplace(method, std::move(method_result));
    }

    for (const ReplicateOutcome& outcome : outcomes)
      if (k < outcome.point_timing.spec_seconds.size())
        kind_result.point_seconds += outcome.point_timing.spec_seconds[k];

    result.kinds.emplace(kind_order[k], std::move(kind_result));
  }

  for (const ReplicateOutcome& outcome : outcomes) {
    result.point_shared_seconds += outcome.point_timing.shared_seconds;
    for (const auto& [method, timing] : outcome.method_timing)
      result.method_shared_seconds[method] += timing.shared_seconds;
  }
  return result;
}

}  // namespace fuzzypov
