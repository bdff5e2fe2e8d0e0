#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fuzzypov {

enum class DesignKind { kSrs, kComplex };

std::string to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

// One microdata record: a person (or household member) with its design
// weight and equivalised income.
struct Observation {
  std::string unit_id;
  std::string household_id;
  std::string stratum;
  std::string psu;
  std::string area;
  double weight = 0.0;
  double income = 0.0;
};

struct DesignInfo {
  DesignKind kind = DesignKind::kSrs;
  // Per-stratum sampling fraction f_h in [0, 1]; missing strata default to 0.
  std::map<std::string, double> finite_population_corrections;
};

// Validated, immutable microdata container.
class SurveyDataset {
 public:
  SurveyDataset(std::vector<Observation> observations, DesignInfo design);

  const std::vector<Observation>& observations() const { return observations_; }
  const DesignInfo& design() const { return design_; }
  std::size_t size() const { return observations_.size(); }

 private:
  std::vector<Observation> observations_;
  DesignInfo design_;
};

// Column-name mapping for CSV ingestion. weight/income/area are required in
// the header; the rest are optional (unit ids default to the row number).
struct CsvSchema {
  std::string unit_id = "unit_id";
  std::string household_id = "hh_id";
  std::string stratum = "stratum";
  std::string psu = "psu";
  std::string area = "area";
  std::string weight = "weight";
  std::string income = "income";
  char delimiter = ',';
  DesignKind design = DesignKind::kSrs;
  std::map<std::string, double> finite_population_corrections;
};

SurveyDataset load_csv(const std::string& path, const CsvSchema& schema = {});
void write_csv(const std::string& path, const SurveyDataset& data, const CsvSchema& schema = {});

inline constexpr const char* kNationalDomain = "NATIONAL";

// Index sets of the estimation domains: one per distinct area label plus the
// synthetic NATIONAL domain covering every row.
struct DomainPartition {
  std::map<std::string, std::vector<std::uint32_t>> domains;
};

DomainPartition partition_by_area(const SurveyDataset& data);

}  // namespace fuzzypov
