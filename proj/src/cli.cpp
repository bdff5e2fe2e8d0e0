#include "fuzzypov/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/estimation.hpp"
#include "fuzzypov/metrics.hpp"
#include "fuzzypov/rng.hpp"
#include "fuzzypov/robustness.hpp"
#include "fuzzypov/util.hpp"

namespace fuzzypov::cli {

using nlohmann::json;

namespace {

constexpr const char* kToolName = "fuzzypov";
constexpr const char* kToolVersion = "0.1.0";

std::string format_cell(double value) {
  if (std::isnan(value)) return "";
  return format_double(value);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path.string());
  out << content;
}

// --- JSON <-> config -------------------------------------------------------

json param_to_json(const ParamValue& value) {
  if (value.kind == ParamValue::Kind::kLiteral) return value.value;
  return value.to_text();
}

ParamValue param_from_json(const json& j) {
  if (j.is_number()) return ParamValue::literal(j.get<double>());
  if (j.is_string()) return ParamValue::parse(j.get<std::string>());
  throw ValidationError("bad parameter value in config");
}

json kind_to_json(const MembershipSpecConfig& config) {
  json j;
  j["kind"] = to_string(config.kind);
  if (config.z1) j["z1"] = param_to_json(*config.z1);
  if (config.z2) j["z2"] = param_to_json(*config.z2);
  if (config.beta) j["beta"] = *config.beta;
  if (config.alpha) j["alpha"] = *config.alpha;
  if (config.provenance) j["provenance"] = to_string(*config.provenance);
  j["fit_rounds"] = config.zbm_fit_rounds;
  return j;
}

MembershipSpecConfig kind_from_json(const json& j) {
  MembershipSpecConfig config;
  config.kind = membership_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("z1")) config.z1 = param_from_json(j.at("z1"));
  if (j.contains("z2")) config.z2 = param_from_json(j.at("z2"));
  if (j.contains("beta")) config.beta = j.at("beta").get<double>();
  if (j.contains("alpha") && j.at("alpha").is_number())
    config.alpha = j.at("alpha").get<double>();
  if (j.contains("provenance")) {
    const auto text = j.at("provenance").get<std::string>();
    config.provenance = text == "positive" ? ParameterProvenance::kPositive
                                           : ParameterProvenance::kNormative;
  }
  config.zbm_fit_rounds = j.value("fit_rounds", 100);
  return config;
}

json config_to_json(const RunConfig& config) {
  json j;
  j["subcommand"] = config.subcommand;
  j["input"] = config.input_path;
  j["out"] = config.output_dir;
  if (config.seed) j["seed"] = *config.seed;
  j["jobs"] = config.jobs;

  json schema;
  schema["unit_id"] = config.schema.unit_id;
  schema["household_id"] = config.schema.household_id;
  schema["stratum"] = config.schema.stratum;
  schema["psu"] = config.schema.psu;
  schema["area"] = config.schema.area;
  schema["weight"] = config.schema.weight;
  schema["income"] = config.schema.income;
  schema["delimiter"] = std::string(1, config.schema.delimiter);
  schema["design"] = to_string(config.schema.design);
  j["schema"] = schema;

  json kinds = json::array();
  for (const MembershipSpecConfig& kind : config.kinds) kinds.push_back(kind_to_json(kind));
  j["kinds"] = kinds;

  j["method"] = config.method;
  j["replicates"] = config.replicates;
  j["g_rule"] = to_string(config.g_rule);
  j["singleton_strata"] =
      config.singleton_policy == SingletonStratumPolicy::kCollapse ? "collapse" : "error";
  j["fpc"] = config.fpc;
  j["per_domain_recalibration"] = config.per_domain_recalibration;
  j["publication_cv_limit"] = config.publication_cv_limit;
  j["dump_replicates"] = config.dump_replicates;

  json simulate;
  simulate["scenario"] = config.scenario;
  simulate["T"] = config.monte_carlo_replicates;
  simulate["srs_sample_size"] = config.srs_sample_size;
  simulate["households_per_area"] = config.households_per_area;
  simulate["zbm_refit_per_sample"] = config.zbm_refit_per_sample;
  simulate["population_basis"] = config.population_basis;
  json areas = json::array();
  for (const AreaConfig& area : config.population.areas) {
    json a;
    a["label"] = area.label;
    a["N"] = area.population_size;
    a["log_mean"] = area.log_mean;
    a["log_sd"] = area.log_sd;
    a["household_sizes"] = area.household_size_weights;
    areas.push_back(a);
  }
  simulate["population"] = json{{"areas", areas}};
  j["simulate"] = simulate;

  json robustness;
  json rk = json::array();
  for (MembershipKind kind : config.robustness.kinds) rk.push_back(to_string(kind));
  robustness["kinds"] = rk;
  robustness["z1_quantiles"] = config.robustness.z1_quantiles;
  robustness["z2_quantiles"] = config.robustness.z2_quantiles;
  robustness["chakravarty_quantiles"] = config.robustness.chakravarty_quantiles;
  robustness["betas"] = config.robustness.betas;
  robustness["rank_pair_quantiles"] = config.robustness.rank_pair_quantiles;
  robustness["rank_betas"] = config.robustness.rank_betas;
  j["robustness"] = robustness;
  return j;
}

RunConfig config_from_json(const json& root) {
  const json& j = root.contains("config") ? root.at("config") : root;
  RunConfig config;
  config.subcommand = j.value("subcommand", "");
  config.input_path = j.value("input", "");
  config.output_dir = j.value("out", ".");
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  config.jobs = j.value("jobs", 1);

  if (j.contains("schema")) {
    const json& schema = j.at("schema");
    config.schema.unit_id = schema.value("unit_id", config.schema.unit_id);
    config.schema.household_id = schema.value("household_id", config.schema.household_id);
    config.schema.stratum = schema.value("stratum", config.schema.stratum);
    config.schema.psu = schema.value("psu", config.schema.psu);
    config.schema.area = schema.value("area", config.schema.area);
    config.schema.weight = schema.value("weight", config.schema.weight);
    config.schema.income = schema.value("income", config.schema.income);
    const std::string delimiter = schema.value("delimiter", ",");
    if (delimiter.size() != 1) throw ValidationError("delimiter must be a single character");
    config.schema.delimiter = delimiter[0];
    config.schema.design = design_kind_from_string(schema.value("design", "srs"));
  }

  if (j.contains("kinds"))
    for (const json& kind : j.at("kinds")) config.kinds.push_back(kind_from_json(kind));

  config.method = j.value("method", config.method);
  config.replicates = j.value("replicates", config.replicates);
  if (j.contains("g_rule")) config.g_rule = g_rule_from_string(j.at("g_rule").get<std::string>());
  if (j.contains("singleton_strata")) {
    const auto text = j.at("singleton_strata").get<std::string>();
    if (text != "collapse" && text != "error")
      throw ValidationError("singleton_strata must be 'collapse' or 'error'");
    config.singleton_policy = text == "collapse" ? SingletonStratumPolicy::kCollapse
                                                 : SingletonStratumPolicy::kError;
  }
  if (j.contains("fpc"))
    config.fpc = j.at("fpc").get<std::map<std::string, double>>();
  config.per_domain_recalibration =
      j.value("per_domain_recalibration", config.per_domain_recalibration);
  config.publication_cv_limit = j.value("publication_cv_limit", config.publication_cv_limit);
  config.dump_replicates = j.value("dump_replicates", config.dump_replicates);

  if (j.contains("simulate")) {
    const json& simulate = j.at("simulate");
    config.scenario = simulate.value("scenario", config.scenario);
    config.monte_carlo_replicates = simulate.value("T", config.monte_carlo_replicates);
    config.srs_sample_size = simulate.value("srs_sample_size", config.srs_sample_size);
    if (simulate.contains("households_per_area"))
      config.households_per_area =
          simulate.at("households_per_area").get<std::map<std::string, int>>();
    config.zbm_refit_per_sample =
        simulate.value("zbm_refit_per_sample", config.zbm_refit_per_sample);
    config.population_basis = simulate.value("population_basis", config.population_basis);
    if (simulate.contains("population") && simulate.at("population").contains("areas")) {
      for (const json& a : simulate.at("population").at("areas")) {
        AreaConfig area;
        area.label = a.at("label").get<std::string>();
        area.population_size = a.at("N").get<int>();
        area.log_mean = a.value("log_mean", area.log_mean);
        area.log_sd = a.value("log_sd", area.log_sd);
        if (a.contains("household_sizes"))
          area.household_size_weights = a.at("household_sizes").get<std::vector<double>>();
        config.population.areas.push_back(std::move(area));
      }
    }
  }

  if (j.contains("robustness")) {
    const json& robustness = j.at("robustness");
    if (robustness.contains("kinds")) {
      config.robustness.kinds.clear();
      for (const json& kind : robustness.at("kinds"))
        config.robustness.kinds.push_back(membership_kind_from_string(kind.get<std::string>()));
    }
    auto load = [&](const char* key, std::vector<double>& target) {
      if (robustness.contains(key)) target = robustness.at(key).get<std::vector<double>>();
    };
    load("z1_quantiles", config.robustness.z1_quantiles);
    load("z2_quantiles", config.robustness.z2_quantiles);
    load("chakravarty_quantiles", config.robustness.chakravarty_quantiles);
    load("betas", config.robustness.betas);
    load("rank_pair_quantiles", config.robustness.rank_pair_quantiles);
    load("rank_betas", config.robustness.rank_betas);
  }
  return config;
}

std::vector<ResamplingMethod> methods_from_string(const std::string& method) {
  if (method == "bootstrap") return {ResamplingMethod::kBootstrap};
  if (method == "jackknife") return {ResamplingMethod::kJackknife};
  if (method == "both") return {ResamplingMethod::kBootstrap, ResamplingMethod::kJackknife};
  if (method == "none") return {};
  throw ValidationError("unknown method: " + method + " (bootstrap|jackknife|both|none)");
}

void write_manifest(const RunConfig& config, const std::filesystem::path& out_dir) {
  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["config"] = config_to_json(config);
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

ReplicationPlan make_plan(const RunConfig& config, ResamplingMethod method,
                          std::uint64_t seed) {
  ReplicationPlan plan;
  plan.method = method;
  plan.replicate_count = config.replicates;
  plan.seed = seed;
  plan.g_rule = config.g_rule;
  plan.singleton_policy = config.singleton_policy;
  plan.finite_population_corrections = config.fpc;
  plan.jobs = config.jobs;
  return plan;
}

// Domain statistic that rebuilds the domain's own distribution and alpha from
// the replicate weights (the per-domain recalibration switch).
Statistic recalibrated_domain_statistic(const SurveyDataset& data, MembershipKind kind,
                                        std::vector<std::uint32_t> rows) {
  std::vector<double> incomes;
  incomes.reserve(rows.size());
  for (std::uint32_t i : rows) incomes.push_back(data.observations()[i].income);
  return [rows = std::move(rows), incomes = std::move(incomes), kind](
             std::span<const double> weights) {
    DomainData domain;
    domain.income = incomes;
    domain.weight.reserve(rows.size());
    for (std::uint32_t i : rows) domain.weight.push_back(weights[i]);
    double total = 0.0;
    for (double w : domain.weight) total += w;
    if (!(total > 0.0)) throw ValidationError("EmptyEffectiveDomain: no replicate weight");
    const DistributionContext context = make_distribution_context(domain);
    const double line = poverty_line(domain);
    const double target = head_count_ratio(domain, line);
    MembershipSpec spec;
    spec.kind = kind;
    spec.provenance = default_provenance(kind);
    spec.alpha = calibrate_alpha(domain, kind, target, &context);
    return fuzzy_index(domain, evaluate_spec(domain, spec, &context));
  };
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config JSON: ") + e.what());
  }
  try {
    return config_from_json(root);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
}

std::string config_to_json_text(const RunConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

void finalize_config(RunConfig& config) {
  if (!config.seed) {
    std::random_device device;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(device()) << 32) ^ static_cast<std::uint64_t>(device());
    config.seed = seed;
    std::cout << "seed: " << seed << " (drawn; pass --seed to reproduce)\n";
  }
  if (config.kinds.empty()) config.kinds = default_spec_configs();
  methods_from_string(config.method);  // validate early
  if (config.replicates < 2) throw ValidationError("replicates must be at least 2");
  if (config.jobs < 1) throw ValidationError("jobs must be positive");
}

int cmd_estimate(const RunConfig& config) {
  if (config.input_path.empty()) throw ValidationError("estimate requires --input");
  const std::vector<ResamplingMethod> methods = methods_from_string(config.method);
  const SurveyDataset data = load_csv(config.input_path, config.schema);
  for (ResamplingMethod method : methods) {
    if (method == ResamplingMethod::kJackknife && data.design().kind != DesignKind::kComplex)
      throw ValidationError(
          "jackknife is designed for complex designs; load the data with schema.design = "
          "complex or use --method bootstrap");
  }

  const std::uint64_t seed = *config.seed;
  const DomainData national = domain_data(data);
  const DistributionContext context = make_distribution_context(national);
  const DomainPartition partition = partition_by_area(data);

  std::vector<MembershipSpec> specs;
  for (std::size_t k = 0; k < config.kinds.size(); ++k)
    specs.push_back(config.kinds[k].resolve(national, context,
                                            derive_seed(seed, seed_stream::kSpecResolve, k)));

  // Domain labels: areas ascending, NATIONAL last.
  std::vector<std::string> domains;
  for (const auto& [label, rows] : partition.domains)
    if (label != kNationalDomain) domains.push_back(label);
  domains.push_back(kNationalDomain);

  std::string estimates_csv = "kind,domain,method,estimate,mse,cv,cv2,publishable\n";
  std::string replicates_csv = "method,domain,replicate_id,value\n";

  for (std::size_t k = 0; k < specs.size(); ++k) {
    const MembershipSpec& spec = specs[k];
    const std::string kind_name = to_string(spec.kind);
    for (const std::string& domain : domains) {
      const bool recalibrated =
          config.per_domain_recalibration && is_distribution_based(spec.kind) &&
          domain != kNationalDomain;
      const Statistic statistic =
          recalibrated ? recalibrated_domain_statistic(data, spec.kind,
                                                       partition.domains.at(domain))
                       : domain_statistic(data, spec, domain);

      if (methods.empty()) {
        std::vector<double> weights;
        weights.reserve(data.size());
        for (const Observation& obs : data.observations()) weights.push_back(obs.weight);
        const double estimate = statistic(weights);
        estimates_csv += kind_name + "," + domain + ",none," + format_double(estimate) +
                         ",,,,\n";
        continue;
      }
      for (ResamplingMethod method : methods) {
        const ReplicationPlan plan =
            make_plan(config, method, derive_seed(seed, seed_stream::kReplicateMse));
        const MseEstimate estimate = method == ResamplingMethod::kBootstrap
                                         ? bootstrap_mse(data, statistic, plan)
                                         : jackknife_mse(data, statistic, plan);
        const double cv_value =
            estimate.point > 0.0 ? std::sqrt(estimate.mse) / estimate.point
                                 : std::numeric_limits<double>::quiet_NaN();
        const bool ok = !std::isnan(cv_value) && cv_value <= config.publication_cv_limit;
        estimates_csv += kind_name + "," + domain + "," + to_string(method) + "," +
                         format_double(estimate.point) + "," + format_double(estimate.mse) +
                         "," + format_cell(cv_value) + "," +
                         (std::isnan(cv_value) ? "" : format_double(cv2(cv_value))) + "," +
                         (ok ? "yes" : "no") + "\n";
        if (config.dump_replicates) append_replicates_csv(replicates_csv, domain, estimate);
      }
    }
  }

  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "estimates.csv", estimates_csv);
  if (config.dump_replicates) write_file(out_dir / "replicates.csv", replicates_csv);
  write_manifest(config, out_dir);
  return 0;
}

int cmd_simulate(const RunConfig& config) {
  PopulationConfig population = config.population;
  if (population.areas.empty()) population = default_population_config();
  population.seed = *config.seed;
  const SurveyDataset pop = generate_population(population);

  ScenarioConfig scenario;
  scenario.kind = design_kind_from_string(config.scenario);
  scenario.srs_sample_size = config.srs_sample_size;
  scenario.households_per_area = config.households_per_area;
  scenario.replicate_count = config.monte_carlo_replicates;
  scenario.methods = methods_from_string(config.method);
  scenario.plan = make_plan(config, ResamplingMethod::kBootstrap, 0);
  scenario.plan.jobs = 1;
  scenario.zbm_refit_per_sample = config.zbm_refit_per_sample;
  scenario.population_distribution_basis = config.population_basis;
  scenario.jobs = config.jobs;

  const ExperimentResult result =
      run_experiment(pop, scenario, config.kinds, *config.seed);

  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);

  // truth.csv: kind, domain, truth
  {
    std::string csv = "kind,domain,truth\n";
    for (MembershipKind kind : result.kind_order) {
      const KindResult& kr = result.kinds.at(kind);
      for (const std::string& domain : result.domains)
        csv += to_string(kind) + "," + domain + "," + format_double(kr.truth.at(domain)) + "\n";
    }
    write_file(out_dir / "truth.csv", csv);
  }

  const auto kind_header = [&]() {
    std::string header = "domain,mean_n";
    for (MembershipKind kind : result.kind_order) header += "," + to_string(kind);
    return header + "\n";
  };

  // bias.csv: rows domains ascending by realized size, columns kinds
  {
    std::string csv = kind_header();
    for (const std::string& domain : result.domains) {
      csv += domain + "," + format_double(result.mean_sample_size.at(domain));
      for (MembershipKind kind : result.kind_order)
        csv += "," + format_double(result.kinds.at(kind).bias.at(domain));
      csv += "\n";
    }
    write_file(out_dir / "bias.csv", csv);
  }

  for (ResamplingMethod method : scenario.methods) {
    const std::string suffix = to_string(method);
    std::string cv_csv = kind_header();
    std::string cv2_csv = kind_header();
    std::string mse_csv = "kind,domain,mean_n,atmse,aemse,bmse\n";
    for (const std::string& domain : result.domains) {
      cv_csv += domain + "," + format_double(result.mean_sample_size.at(domain));
      cv2_csv += domain + "," + format_double(result.mean_sample_size.at(domain));
      for (MembershipKind kind : result.kind_order) {
        const auto& report = result.kinds.at(kind).methods.at(method).report;
        cv_csv += "," + format_cell(report.per_domain.at(domain).cv);
        cv2_csv += "," + format_cell(report.per_domain.at(domain).cv2);
      }
      cv_csv += "\n";
      cv2_csv += "\n";
    }
    for (MembershipKind kind : result.kind_order) {
      const KindResult& kr = result.kinds.at(kind);
      const auto& method_result = kr.methods.at(method);
      for (const std::string& domain : result.domains) {
        const double atmse = kr.mc_mse.at(domain);
        const double aemse = method_result.aemse_by_domain.at(domain);
        mse_csv += to_string(kind) + "," + domain + "," +
                   format_double(result.mean_sample_size.at(domain)) + "," +
                   format_double(atmse) + "," + format_double(aemse) + "," +
                   format_double(aemse - atmse) + "\n";
      }
    }
    write_file(out_dir / ("cv_" + suffix + ".csv"), cv_csv);
    write_file(out_dir / ("cv2_" + suffix + ".csv"), cv2_csv);
    write_file(out_dir / ("mse_" + suffix + ".csv"), mse_csv);
  }

  // aggregates.csv: kind, method, atmse, aemse, bmse over the area domains
  if (!scenario.methods.empty()) {
    std::string csv = "kind,method,atmse,aemse,bmse\n";
    for (MembershipKind kind : result.kind_order) {
      for (ResamplingMethod method : scenario.methods) {
        const auto& aggregate = result.kinds.at(kind).methods.at(method).report.aggregate;
        csv += to_string(kind) + "," + to_string(method) + "," +
               format_double(aggregate.atmse) + "," + format_double(aggregate.aemse) + "," +
               format_double(aggregate.bmse) + "\n";
      }
    }
    write_file(out_dir / "aggregates.csv", csv);
  }

  // Wall-clock diagnostics; deliberately not a CSV so re-runs stay comparable
  // on the data files alone.
  {
    std::string txt = "wall-clock summary (seconds)\n";
    txt += "point evaluation shared distribution pass: " +
           format_double(result.point_shared_seconds) + "\n";
    for (const auto& [method, seconds] : result.method_shared_seconds)
      txt += to_string(method) + " shared distribution pass: " + format_double(seconds) + "\n";
    for (MembershipKind kind : result.kind_order) {
      const KindResult& kr = result.kinds.at(kind);
      txt += to_string(kind) + " point evaluations: " + format_double(kr.point_seconds) + "\n";
      for (const auto& [method, method_result] : kr.methods) {
        const double per = method_result.timing.replicate_evaluations > 0
                               ? method_result.timing.seconds /
                                     static_cast<double>(method_result.timing.replicate_evaluations)
                               : 0.0;
        txt += to_string(kind) + " " + to_string(method) + ": total " +
               format_double(method_result.timing.seconds) + " over " +
               std::to_string(method_result.timing.replicate_evaluations) +
               " replicate evaluations (" + format_double(per) + " each)\n";
      }
    }
    write_file(out_dir / "timing.txt", txt);
  }

  write_manifest(config, out_dir);
  return 0;
}

int cmd_robustness(const RunConfig& config) {
  if (config.input_path.empty()) throw ValidationError("robustness requires --input");
  const SurveyDataset data = load_csv(config.input_path, config.schema);
  const DomainData national = domain_data(data);
  const std::uint64_t seed = *config.seed;

  const std::filesystem::path out_dir(config.output_dir);
  std::filesystem::create_directories(out_dir);

  for (MembershipKind kind : config.robustness.kinds) {
    // --- MSE surface over the threshold grid ---
    SweepGrid grid;
    grid.kind = kind;
    if (kind == MembershipKind::kChakravarty2019) {
      grid.z2_values = weighted_quantiles(national, config.robustness.chakravarty_quantiles);
    } else {
      grid.z1_values = weighted_quantiles(national, config.robustness.z1_quantiles);
      grid.z2_values = weighted_quantiles(national, config.robustness.z2_quantiles);
    }
    if (kind == MembershipKind::kBelhadj2014) grid.beta_values = config.robustness.betas;

    const ReplicationPlan plan =
        make_plan(config, ResamplingMethod::kBootstrap, derive_seed(seed, seed_stream::kReplicateMse));
    const std::vector<SurfacePoint> surface = mse_surface(data, grid, plan);
    std::string surface_csv = "z1,z2,beta,estimate,mse,status\n";
    for (const SurfacePoint& point : surface) {
      surface_csv += format_cell(point.z1) + "," + format_cell(point.z2) + "," +
                     format_cell(point.beta) + "," + format_cell(point.estimate) + "," +
                     format_cell(point.mse) + "," + (point.skipped ? "skipped" : "ok") + "\n";
    }
    write_file(out_dir / ("surface_" + to_string(kind) + ".csv"), surface_csv);

    // --- Rank stability against the benchmark parameters ---
    MembershipSpecConfig benchmark;
    benchmark.kind = kind;
    std::vector<MembershipSpecConfig> alternatives;
    if (kind == MembershipKind::kChakravarty2019) {
      benchmark.z2 = ParamValue::quantile(0.5);
      for (double p : config.robustness.chakravarty_quantiles) {
        MembershipSpecConfig alt = benchmark;
        alt.z2 = ParamValue::quantile(p);
        alternatives.push_back(alt);
      }
    } else {
      benchmark.z1 = ParamValue::quantile(kind == MembershipKind::kBelhadj2014 ? 0.01 : 0.001);
      benchmark.z2 = ParamValue::quantile(0.99);
      if (kind == MembershipKind::kBelhadj2014) benchmark.beta = 2.0;
      for (double p : config.robustness.rank_pair_quantiles) {
        MembershipSpecConfig alt = benchmark;
        alt.z1 = ParamValue::quantile(p);
        alt.z2 = ParamValue::quantile(1.0 - p);
        alternatives.push_back(alt);
      }
      if (kind == MembershipKind::kBelhadj2014) {
        for (double beta : config.robustness.rank_betas) {
          MembershipSpecConfig alt = benchmark;
          alt.beta = beta;
          alternatives.push_back(alt);
        }
      }
    }
    const RankStabilityReport report = rank_stability(data, benchmark, alternatives);

    const auto param_cell = [](const std::optional<ParamValue>& value) -> std::string {
      if (!value) return "";
      if (value->kind == ParamValue::Kind::kQuantile) return format_double(value->value);
      return format_double(value->value);
    };
    std::string ranks_csv = "z1_quantile,z2_quantile,beta,tau,rho\n";
    ranks_csv += param_cell(report.benchmark.z1) + "," + param_cell(report.benchmark.z2) + "," +
                 (report.benchmark.beta ? format_double(*report.benchmark.beta) : "") +
                 ",1,1\n";
    for (const RankAlternative& alt : report.alternatives) {
      ranks_csv += param_cell(alt.params.z1) + "," + param_cell(alt.params.z2) + "," +
                   (alt.params.beta ? format_double(*alt.params.beta) : "") + "," +
                   format_double(alt.tau) + "," + format_double(alt.rho) + "\n";
    }
    write_file(out_dir / ("ranks_" + to_string(kind) + ".csv"), ranks_csv);
  }

  write_manifest(config, out_dir);
  return 0;
}

int run(RunConfig config) {
  try {
    finalize_config(config);
    if (config.subcommand == "estimate") return cmd_estimate(config);
    if (config.subcommand == "simulate") return cmd_simulate(config);
    if (config.subcommand == "robustness") return cmd_robustness(config);
    throw ValidationError("unknown subcommand: " + config.subcommand);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fuzzypov::cli
