#include "fuzzypov/survey_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/util.hpp"

namespace fuzzypov {

std::string to_string(DesignKind kind) {
  return kind == DesignKind::kSrs ? "srs" : "complex";
}

DesignKind design_kind_from_string(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "srs") return DesignKind::kSrs;
  if (lower == "complex") return DesignKind::kComplex;
  throw ValidationError("unknown design kind: " + name);
}

SurveyDataset::SurveyDataset(std::vector<Observation> observations, DesignInfo design)
    : observations_(std::move(observations)), design_(std::move(design)) {
  if (observations_.empty()) throw ValidationError("EmptyDataset: no observations");
  std::unordered_set<std::string> ids;
  ids.reserve(observations_.size());
  double total_weight = 0.0;
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    const Observation& obs = observations_[i];
    if (!std::isfinite(obs.weight) || obs.weight < 0.0)
      throw ValidationError("NegativeWeight: unit " + obs.unit_id);
    if (!std::isfinite(obs.income) || obs.income < 0.0)
      throw ValidationError("NegativeIncome: unit " + obs.unit_id);
    if (obs.area.empty())
      throw ValidationError("missing area label: unit " + obs.unit_id);
    if (!ids.insert(obs.unit_id).second)
      throw ValidationError("DuplicateUnitId: " + obs.unit_id);
    if (design_.kind == DesignKind::kComplex && (obs.stratum.empty() || obs.psu.empty()))
      throw ValidationError("complex design requires stratum and psu: unit " + obs.unit_id);
    total_weight += obs.weight;
  }
  if (!(total_weight > 0.0)) throw ValidationError("ZeroTotalWeight: all weights are zero");
  for (const auto& [stratum, f] : design_.finite_population_corrections) {
    if (!(f >= 0.0 && f <= 1.0))
      throw ValidationError("finite population correction out of [0,1] for stratum " + stratum);
  }
}

namespace {

// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string escape_csv_field(const std::string& field, char delimiter) {
  if (field.find(delimiter) == std::string::npos && field.find('"') == std::string::npos &&
      field.find('\n') == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError("NonNumericField: row " + std::to_string(row) + ", column " +
                          column + ", value '" + text + "'");
  }
  return value;
}

// Collects row-level diagnostics so a bad file reports every offending row.
class RowErrors {
 public:
  void add(const std::string& message) {
    ++count_;
    if (count_ <= kLimit) lines_.push_back(message);
  }
  bool empty() const { return count_ == 0; }
  [[noreturn]] void raise() const {
    std::string message;
    for (const std::string& line : lines_) {
      if (!message.empty()) message += '\n';
      message += line;
    }
    if (count_ > kLimit)
      message += "\n... and " + std::to_string(count_ - kLimit) + " more rows";
    throw ValidationError(message);
  }

 private:
  static constexpr std::size_t kLimit = 20;
  std::vector<std::string> lines_;
  std::size_t count_ = 0;
};

}  // namespace

SurveyDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw ValidationError("EmptyDataset: " + path);
  if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();

  const std::vector<std::string> header = split_csv_line(header_line, schema.delimiter);
  std::unordered_map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < header.size(); ++i) columns.emplace(header[i], i);

  auto find_column = [&](const std::string& name,
                         bool required) -> std::optional<std::size_t> {
    auto it = columns.find(name);
    if (it != columns.end()) return it->second;
    if (required) throw ValidationError("MissingColumn: " + name);
    return std::nullopt;
  };

  const auto col_weight = *find_column(schema.weight, true);
  const auto col_income = *find_column(schema.income, true);
  const auto col_area = *find_column(schema.area, true);
  const bool complex = schema.design == DesignKind::kComplex;
  const auto col_unit = find_column(schema.unit_id, false);
  const auto col_household = find_column(schema.household_id, false);
  const auto col_stratum = find_column(schema.stratum, complex);
  const auto col_psu = find_column(schema.psu, complex);

  std::vector<Observation> observations;
  RowErrors errors;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv_line(line, schema.delimiter);
    auto field = [&](std::size_t col) -> const std::string& {
      static const std::string kEmpty;
      return col < fields.size() ? fields[col] : kEmpty;
    };
    Observation obs;
    obs.unit_id = col_unit ? field(*col_unit) : std::to_string(row);
    if (obs.unit_id.empty()) obs.unit_id = std::to_string(row);
    obs.household_id = col_household ? field(*col_household) : obs.unit_id;
    if (col_stratum) obs.stratum = field(*col_stratum);
    if (col_psu) obs.psu = field(*col_psu);
    obs.area = field(col_area);
    try {
      obs.weight = parse_number(field(col_weight), row, schema.weight);
      obs.income = parse_number(field(col_income), row, schema.income);
      if (obs.weight < 0.0) throw ValidationError("NegativeWeight: row " + std::to_string(row));
      if (obs.income < 0.0) throw ValidationError("NegativeIncome: row " + std::to_string(row));
    } catch (const ValidationError& e) {
      errors.add(e.what());
      continue;
    }
    observations.push_back(std::move(obs));
  }
  if (!errors.empty()) errors.raise();
  if (observations.empty()) throw ValidationError("EmptyDataset: " + path);

  DesignInfo design;
  design.kind = schema.design;
  design.finite_population_corrections = schema.finite_population_corrections;
  return SurveyDataset(std::move(observations), std::move(design));
}

void write_csv(const std::string& path, const SurveyDataset& data, const CsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  const char d = schema.delimiter;
  out << schema.unit_id << d << schema.household_id << d << schema.stratum << d << schema.psu
      << d << schema.area << d << schema.weight << d << schema.income << '\n';
  for (const Observation& obs : data.observations()) {
    out << escape_csv_field(obs.unit_id, d) << d << escape_csv_field(obs.household_id, d) << d
        << escape_csv_field(obs.stratum, d) << d << escape_csv_field(obs.psu, d) << d
        << escape_csv_field(obs.area, d) << d << format_double(obs.weight) << d
        << format_double(obs.income) << '\n';
  }
}

DomainPartition partition_by_area(const SurveyDataset& data) {
  DomainPartition partition;
  auto& national = partition.domains[kNationalDomain];
  national.reserve(data.size());
  for (std::uint32_t i = 0; i < data.size(); ++i) {
    partition.domains[data.observations()[i].area].push_back(i);
    national.push_back(i);
  }
  return partition;
}

}  // namespace fuzzypov
