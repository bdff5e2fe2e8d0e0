#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fuzzypov/cli.hpp"
#include "fuzzypov/errors.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fuzzypov::ValidationError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct SharedFlags {
  std::string config_path;
  std::string input;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void add_shared(CLI::App* cmd, SharedFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config or manifest; flags override it");
  cmd->add_option("--input,-i", flags.input, "input microdata CSV");
  cmd->add_option("--out,-o", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "master seed (drawn and echoed when absent)");
  cmd->add_option("--jobs,-j", flags.jobs, "worker threads for replicates");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fuzzy poverty indices with resampling-based MSE estimation"};
  app.require_subcommand(1);

  SharedFlags estimate_flags, simulate_flags, robustness_flags;

  // estimate
  auto* estimate = app.add_subcommand("estimate", "estimate indices and MSEs from microdata");
  add_shared(estimate, estimate_flags);
  std::string est_method, est_g_rule, est_design, est_delimiter, est_kinds;
  std::string est_income_col, est_weight_col, est_area_col, est_stratum_col, est_psu_col;
  int est_replicates = 0;
  bool est_dump_replicates = false, est_per_domain = false;
  estimate->add_option("--method", est_method, "bootstrap|jackknife|both|none");
  estimate->add_option("--replicates,-R", est_replicates, "bootstrap replicate count");
  estimate->add_option("--g-rule", est_g_rule, "jackknife variance factor: rescaling|classical");
  estimate->add_option("--design", est_design, "srs|complex");
  estimate->add_option("--delimiter", est_delimiter, "CSV delimiter (default ,)");
  estimate->add_option("--kinds", est_kinds, "comma-separated membership kinds (default: all)");
  estimate->add_option("--income-col", est_income_col, "income column name");
  estimate->add_option("--weight-col", est_weight_col, "weight column name");
  estimate->add_option("--area-col", est_area_col, "area column name");
  estimate->add_option("--stratum-col", est_stratum_col, "stratum column name");
  estimate->add_option("--psu-col", est_psu_col, "PSU column name");
  estimate->add_flag("--dump-replicates", est_dump_replicates, "write replicates.csv");
  estimate->add_flag("--per-domain-recalibration", est_per_domain,
                     "recalibrate distribution-based kinds per domain");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo study");
  add_shared(simulate, simulate_flags);
  std::string sim_scenario, sim_method, sim_g_rule, sim_kinds;
  int sim_T = 0, sim_replicates = 0, sim_srs_n = 0;
  simulate->add_option("--scenario", sim_scenario, "srs|complex");
  simulate->add_option("--T", sim_T, "Monte Carlo replicates");
  simulate->add_option("--replicates,-R", sim_replicates, "bootstrap replicate count");
  simulate->add_option("--method", sim_method, "bootstrap|jackknife|both|none");
  simulate->add_option("--g-rule", sim_g_rule, "jackknife variance factor: rescaling|classical");
  simulate->add_option("--srs-n", sim_srs_n, "SRS sample size");
  simulate->add_option("--kinds", sim_kinds, "comma-separated membership kinds (default: all)");

  // robustness
  auto* robustness = app.add_subcommand("robustness", "MSE surfaces and rank stability");
  add_shared(robustness, robustness_flags);
  std::string rob_kinds;
  int rob_replicates = 0;
  robustness->add_option("--kinds", rob_kinds, "comma-separated threshold kinds");
  robustness->add_option("--replicates,-R", rob_replicates, "bootstrap replicate count");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    SharedFlags& flags = active == estimate ? estimate_flags
                         : active == simulate ? simulate_flags
                                              : robustness_flags;

    fuzzypov::cli::RunConfig config;
    if (!flags.config_path.empty())
      config = fuzzypov::cli::config_from_json_text(slurp(flags.config_path));
    config.subcommand = active->get_name();

    if (active->count("--input")) config.input_path = flags.input;
    if (active->count("--out")) config.output_dir = flags.out;
    if (active->count("--seed")) config.seed = flags.seed;
    if (active->count("--jobs")) config.jobs = flags.jobs;

    const auto parse_kind_list = [](const std::string& text) {
      std::vector<fuzzypov::MembershipSpecConfig> kinds;
      const auto defaults = fuzzypov::default_spec_configs();
      std::stringstream stream(text);
      std::string name;
      while (std::getline(stream, name, ',')) {
        const auto kind = fuzzypov::membership_kind_from_string(name);
        bool found = false;
        for (const auto& d : defaults) {
          if (d.kind == kind) {
            kinds.push_back(d);
            found = true;
            break;
          }
        }
        if (!found) {
          fuzzypov::MembershipSpecConfig c;
          c.kind = kind;
          kinds.push_back(c);
        }
      }
      return kinds;
    };

    if (active == estimate) {
      if (estimate->count("--method")) config.method = est_method;
      if (estimate->count("--replicates")) config.replicates = est_replicates;
      if (estimate->count("--g-rule")) config.g_rule = fuzzypov::g_rule_from_string(est_g_rule);
      if (estimate->count("--design"))
        config.schema.design = fuzzypov::design_kind_from_string(est_design);
      if (estimate->count("--delimiter")) {
        if (est_delimiter.size() != 1)
          throw fuzzypov::ValidationError("delimiter must be a single character");
        config.schema.delimiter = est_delimiter[0];
      }
      if (estimate->count("--kinds")) config.kinds = parse_kind_list(est_kinds);
      if (estimate->count("--income-col")) config.schema.income = est_income_col;
      if (estimate->count("--weight-col")) config.schema.weight = est_weight_col;
      if (estimate->count("--area-col")) config.schema.area = est_area_col;
      if (estimate->count("--stratum-col")) config.schema.stratum = est_stratum_col;
      if (estimate->count("--psu-col")) config.schema.psu = est_psu_col;
      if (est_dump_replicates) config.dump_replicates = true;
      if (est_per_domain) config.per_domain_recalibration = true;
    } else if (active == simulate) {
      if (simulate->count("--scenario")) config.scenario = sim_scenario;
      if (simulate->count("--T")) config.monte_carlo_replicates = sim_T;
      if (simulate->count("--replicates")) config.replicates = sim_replicates;
      if (simulate->count("--method")) config.method = sim_method;
      if (simulate->count("--g-rule")) config.g_rule = fuzzypov::g_rule_from_string(sim_g_rule);
      if (simulate->count("--srs-n")) config.srs_sample_size = sim_srs_n;
      if (simulate->count("--kinds")) config.kinds = parse_kind_list(sim_kinds);
    } else {
      if (robustness->count("--replicates")) config.replicates = rob_replicates;
      if (robustness->count("--kinds")) {
        config.robustness.kinds.clear();
        std::stringstream stream(rob_kinds);
        std::string name;
        while (std::getline(stream, name, ','))
          config.robustness.kinds.push_back(fuzzypov::membership_kind_from_string(name));
      }
    }

    return fuzzypov::cli::run(std::move(config));
  } catch (const fuzzypov::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
