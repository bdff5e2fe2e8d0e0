#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/rng.hpp"
#include "fuzzypov/survey_data.hpp"

using namespace fuzzypov;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::path("scratch_survey_data");
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_fixture(const std::string& name, const std::string& content) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

const std::string kBasicCsv =
    "unit_id,hh_id,stratum,psu,area,weight,income\n"
    "u1,h1,s1,p1,A,1.5,100\n"
    "u2,h1,s1,p1,A,2.5,200\n"
    "u3,h2,s2,p2,B,1.0,50\n";

}  // namespace

TEST_CASE("load_csv reads a well-formed file in order") {
  const auto path = write_fixture("basic.csv", kBasicCsv);
  const SurveyDataset data = load_csv(path);
  REQUIRE(data.size() == 3);
  CHECK(data.observations()[0].unit_id == "u1");
  CHECK(data.observations()[1].income == doctest::Approx(200.0));
  CHECK(data.observations()[2].area == "B");
  CHECK(data.observations()[2].weight == doctest::Approx(1.0));

  const SurveyDataset again = load_csv(path);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(again.observations()[i].income == data.observations()[i].income);
    CHECK(again.observations()[i].weight == data.observations()[i].weight);
  }
}

TEST_CASE("load_csv rejects a negative income with the row number") {
  const auto path = write_fixture("neg_income.csv",
                                  "unit_id,area,weight,income\n"
                                  "u1,A,1,10\n"
                                  "u2,A,1,-5\n"
                                  "u3,A,1,20\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("NegativeIncome: row 2"),
                       ValidationError);
}

TEST_CASE("load_csv reports every bad row, one line each") {
  const auto path = write_fixture("multi_bad.csv",
                                  "unit_id,area,weight,income\n"
                                  "u1,A,1,-10\n"
                                  "u2,A,1,20\n"
                                  "u3,A,abc,30\n");
  try {
    load_csv(path);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("NegativeIncome: row 1") != std::string::npos);
    CHECK(what.find("NonNumericField: row 3") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects a missing required column") {
  const auto path = write_fixture("no_weight.csv",
                                  "unit_id,area,income\n"
                                  "u1,A,10\n");
  CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("MissingColumn: weight"),
                       ValidationError);
}

TEST_CASE("load_csv rejects non-numeric, duplicate-id and empty inputs") {
  CHECK_THROWS_WITH_AS(load_csv(write_fixture("nan.csv",
                                              "unit_id,area,weight,income\n"
                                              "u1,A,1,abc\n")),
                       doctest::Contains("NonNumericField"), ValidationError);
  CHECK_THROWS_WITH_AS(load_csv(write_fixture("dup.csv",
                                              "unit_id,area,weight,income\n"
                                              "u1,A,1,10\nu1,A,1,20\n")),
                       doctest::Contains("DuplicateUnitId"), ValidationError);
  CHECK_THROWS_WITH_AS(load_csv(write_fixture("empty.csv", "unit_id,area,weight,income\n")),
                       doctest::Contains("EmptyDataset"), ValidationError);
  CHECK_THROWS_WITH_AS(load_csv(write_fixture("negw.csv",
                                              "unit_id,area,weight,income\n"
                                              "u1,A,-1,10\n")),
                       doctest::Contains("NegativeWeight"), ValidationError);
}

TEST_CASE("complex design requires stratum and psu columns") {
  CsvSchema schema;
  schema.design = DesignKind::kComplex;
  const auto path = write_fixture("no_strata.csv",
                                  "unit_id,area,weight,income\n"
                                  "u1,A,1,10\n");
  CHECK_THROWS_WITH_AS(load_csv(path, schema), doctest::Contains("MissingColumn"),
                       ValidationError);
}

TEST_CASE("zero-weight rows are retained but total weight must be positive") {
  const auto path = write_fixture("zero_weight.csv",
                                  "unit_id,area,weight,income\n"
                                  "u1,A,0,10\n"
                                  "u2,A,2,20\n");
  const SurveyDataset data = load_csv(path);
  CHECK(data.size() == 2);

  const auto all_zero = write_fixture("all_zero.csv",
                                      "unit_id,area,weight,income\n"
                                      "u1,A,0,10\n");
  CHECK_THROWS_WITH_AS(load_csv(all_zero), doctest::Contains("ZeroTotalWeight"),
                       ValidationError);
}

TEST_CASE("write_csv round-trips the numeric content") {
  const auto path = write_fixture("roundtrip_in.csv", kBasicCsv);
  const SurveyDataset data = load_csv(path);
  const auto out_path = (scratch_dir() / "roundtrip_out.csv").string();
  write_csv(out_path, data);
  const SurveyDataset reloaded = load_csv(out_path);
  REQUIRE(reloaded.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(reloaded.observations()[i].weight == data.observations()[i].weight);
    CHECK(reloaded.observations()[i].income == data.observations()[i].income);
    CHECK(reloaded.observations()[i].unit_id == data.observations()[i].unit_id);
  }
}

TEST_CASE("round-trip preserves awkward doubles exactly") {
  std::vector<Observation> observations;
  Rng rng(20240901);
  for (int i = 0; i < 50; ++i) {
    Observation obs;
    obs.unit_id = "u" + std::to_string(i);
    obs.household_id = obs.unit_id;
    obs.area = "A";
    obs.weight = rng.next_double() * 1e3;
    obs.income = rng.next_double() * 1e5;
    observations.push_back(obs);
  }
  const SurveyDataset data(std::move(observations), {});
  const auto path = (scratch_dir() / "awkward.csv").string();
  write_csv(path, data);
  const SurveyDataset reloaded = load_csv(path);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(reloaded.observations()[i].weight == data.observations()[i].weight);
    CHECK(reloaded.observations()[i].income == data.observations()[i].income);
  }
}

TEST_CASE("partition_by_area groups rows and adds NATIONAL") {
  std::vector<Observation> observations;
  for (const char* area : {"A", "A", "B"}) {
    Observation obs;
    obs.unit_id = "u" + std::to_string(observations.size());
    obs.area = area;
    obs.weight = 1.0;
    obs.income = 1.0;
    observations.push_back(obs);
  }
  const SurveyDataset data(std::move(observations), {});
  const DomainPartition partition = partition_by_area(data);
  REQUIRE(partition.domains.size() == 3);
  CHECK(partition.domains.at("A") == std::vector<std::uint32_t>{0, 1});
  CHECK(partition.domains.at("B") == std::vector<std::uint32_t>{2});
  CHECK(partition.domains.at(kNationalDomain) == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("partition of a single area still adds NATIONAL") {
  std::vector<Observation> observations(2);
  observations[0] = {"u0", "u0", "", "", "A", 1.0, 1.0};
  observations[1] = {"u1", "u1", "", "", "A", 1.0, 2.0};
  const SurveyDataset data(std::move(observations), {});
  const DomainPartition partition = partition_by_area(data);
  REQUIRE(partition.domains.size() == 2);
  CHECK(partition.domains.at("A").size() == 2);
  CHECK(partition.domains.at(kNationalDomain).size() == 2);
}

TEST_CASE("partition matches the nine-area complex layout") {
  const std::vector<std::pair<std::string, int>> layout = {
      {"Burgenland", 6},     {"Carinthia", 55},      {"Lower Austria", 157},
      {"Salzburg", 124},     {"Styria", 48},         {"Tyrol", 128},
      {"Upper Austria", 100},{"Vienna", 187},        {"Vorarlberg", 3}};
  std::vector<Observation> observations;
  for (const auto& [area, count] : layout) {
    for (int i = 0; i < count; ++i) {
      Observation obs;
      obs.unit_id = area + std::to_string(i);
      obs.area = area;
      obs.weight = 1.0;
      obs.income = 1.0;
      observations.push_back(obs);
    }
  }
  const SurveyDataset data(std::move(observations), {});
  const DomainPartition partition = partition_by_area(data);
  REQUIRE(partition.domains.size() == 10);
  std::size_t total = 0;
  for (const auto& [area, count] : layout) {
    CHECK(partition.domains.at(area).size() == static_cast<std::size_t>(count));
    total += partition.domains.at(area).size();
  }
  CHECK(total == 808);
  CHECK(partition.domains.at(kNationalDomain).size() == 808);
}

TEST_CASE("area domain sizes always sum to the dataset size") {
  Rng rng(7);
  for (int round = 0; round < 20; ++round) {
    std::vector<Observation> observations;
    const auto n = 1 + rng.below(40);
    for (std::uint64_t i = 0; i < n; ++i) {
      Observation obs;
      obs.unit_id = std::to_string(i);
      obs.area = std::string(1, static_cast<char>('A' + rng.below(5)));
      obs.weight = 1.0;
      obs.income = rng.next_double();
      observations.push_back(obs);
    }
    const SurveyDataset data(std::move(observations), {});
    const DomainPartition partition = partition_by_area(data);
    std::size_t total = 0;
    for (const auto& [label, rows] : partition.domains)
      if (label != kNationalDomain) total += rows.size();
    CHECK(total == data.size());
  }
}
