#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "drscreen/config.hpp"
#include "drscreen/grid.hpp"

using namespace drscreen;
namespace fs = std::filesystem;

namespace {

std::string config_path(const char* name) {
  return std::string(DRSCREEN_CONFIG_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// a scratch config next to the shipped life table
fs::path write_temp_config(const std::string& name, const std::string& text) {
  fs::path dir = fs::temp_directory_path() / "drscreen_io_tests";
  fs::create_directories(dir);
  fs::copy_file(config_path("life_table.csv"), dir / "life_table.csv",
                fs::copy_options::overwrite_existing);
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

const char* kMinimalConfig = R"JSON({
  "graders": {
    "M": {"kind": "human", "sensitivity": 0.9, "specificity": 0.95, "cost_per_read": 5.0}
  },
  "strategies": ["M"],
  "status_quo": "M",
  "transitions": {"p_onset": 0.02, "p_blind_untreated": 0.1, "p_blind_treated": 0.02},
  "utilities": {"NonVTDR": 0.9, "VTDR": 0.8, "TreatedDR": 0.85, "Blind": 0.5},
  "costs": {"referral": 100, "blindness_annual": 4000},
  "discounting": {"cost_rate": 0.03, "effect_rate": 0.03},
  "cohort": {"size": 1000, "screening_prevalence": 0.07, "life_table": "life_table.csv",
             "initial_state_mix": {"VTDR": 0.07}}
})JSON";

}  // namespace

TEST_CASE("a minimal valid config loads") {
  fs::path p = write_temp_config("minimal.json", kMinimalConfig);
  ModelInputs in = load_config(p.string());
  CHECK(in.graders.profiles().size() == 1);
  CHECK(in.strategies.size() == 1);
  CHECK(in.status_quo == "M");
  CHECK(in.params.treatment_uptake == doctest::Approx(0.70));  // default
  CHECK(in.cohort_size == doctest::Approx(1000.0));
  CHECK(!in.config_hash.empty());

  // the configured cohort size reaches the scenarios
  RunManifest manifest;
  auto grid = expand_grid(in, manifest);
  REQUIRE(!grid.empty());
  CHECK(grid.front().cohort_size == doctest::Approx(1000.0));
}

TEST_CASE("domain violations are rejected with the offending path") {
  std::string broken = kMinimalConfig;
  auto pos = broken.find("\"sensitivity\": 0.9");
  broken.replace(pos, 18, "\"sensitivity\": 1.2");
  fs::path p = write_temp_config("broken.json", broken);
  CHECK_THROWS_WITH_AS(load_config(p.string()), doctest::Contains("sensitivity"),
                       ConfigError);
}

TEST_CASE("unknown strategy tokens are rejected at load") {
  std::string broken = kMinimalConfig;
  auto pos = broken.find("\"strategies\": [\"M\"]");
  broken.replace(pos, 19, "\"strategies\": [\"M\", \"M+X\"]");
  fs::path p = write_temp_config("badstrat.json", broken);
  CHECK_THROWS_WITH_AS(load_config(p.string()), doctest::Contains("unknown grader id"),
                       ConfigError);
}

TEST_CASE("missing required keys are named") {
  std::string broken = kMinimalConfig;
  auto pos = broken.find("\"screening_prevalence\": 0.07, ");
  broken.erase(pos, 30);
  fs::path p = write_temp_config("missing.json", broken);
  CHECK_THROWS_WITH_AS(load_config(p.string()),
                       doctest::Contains("screening_prevalence"), ConfigError);
}

TEST_CASE("the shipped example config loads and passes every invariant") {
  ModelInputs in = load_config(config_path("example.json"));
  CHECK(in.graders.profiles().size() == 3);
  CHECK(in.strategies.size() == 9);
  CHECK(in.status_quo == "M\xC2\xB7M+M2");
  CHECK(in.psa_distributions.size() >= 15);
  in.params.validate();
}

TEST_CASE("config overlays deep-merge in order") {
  fs::path base = write_temp_config("base.json", kMinimalConfig);
  fs::path overlay = write_temp_config(
      "overlay.json", R"({"costs": {"referral": 250}, "wtp": {"gdp_per_capita": 9000}})");
  ModelInputs in = load_config({base.string(), overlay.string()});
  CHECK(in.params.referral_cost == doctest::Approx(250.0));
  CHECK(in.params.blindness_cost_annual == doctest::Approx(4000.0));  // untouched
  CHECK(in.wtp.gdp_per_capita == doctest::Approx(9000.0));
}

TEST_CASE("config hash tracks every parameter change") {
  fs::path base = write_temp_config("hash_a.json", kMinimalConfig);
  ModelInputs a = load_config(base.string());
  std::string changed = kMinimalConfig;
  auto pos = changed.find("\"referral\": 100");
  changed.replace(pos, 15, "\"referral\": 101");
  fs::path b = write_temp_config("hash_b.json", changed);
  ModelInputs in_b = load_config(b.string());
  CHECK(a.config_hash != in_b.config_hash);

  // identical content reloads to the identical hash
  ModelInputs a2 = load_config(base.string());
  CHECK(a.config_hash == a2.config_hash);
}

TEST_CASE("the default manifest expands to exactly 270 scenarios") {
  ModelInputs in = load_config(config_path("example.json"));
  RunManifest manifest;
  auto grid = expand_grid(in, manifest);
  CHECK(grid.size() == 270);  // 9 strategies x 6 frequencies x 5 age groups
}

TEST_CASE("run_grid evaluates every scenario with the right comparator") {
  ModelInputs in = load_config(config_path("example.json"));
  RunManifest manifest;
  manifest.workers = 4;
  auto rows = run_grid(in, manifest);
  REQUIRE(rows.size() == 270);
  for (const auto& row : rows) {
    CAPTURE(row.id);
    REQUIRE(row.error.empty());
    REQUIRE(row.result.has_value());
    REQUIRE(row.cea.has_value());
    // comparator shares frequency and age group and is the manual strategy
    const std::string expected_comparator = std::string("M\xC2\xB7M+M2|") +
                                            to_string(row.spec.frequency) + "|" +
                                            to_string(row.spec.age_group);
    CHECK(row.cea->comparator_id == expected_comparator);
    if (row.spec.strategy == in.status_quo)
      CHECK(row.cea->icer.kind == IcerKind::Undefined);  // its own comparator
  }
}

TEST_CASE("a single-scenario selection produces one self-compared row") {
  ModelInputs in = load_config(config_path("example.json"));
  RunManifest manifest;
  manifest.strategies = {in.status_quo};
  manifest.frequencies = {Frequency::Annual};
  manifest.age_groups = {{20, 79}};
  auto rows = run_grid(in, manifest);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].cea.has_value());
  CHECK(rows[0].cea->icer.kind == IcerKind::Undefined);
  CHECK(rows[0].cea->ce_class == CeClass::Undefined);
}

TEST_CASE("grid failures surface as error rows, never absence") {
  ModelInputs in = load_config(config_path("example.json"));
  // sabotage the loaded parameters so every cohort run fails its validation
  in.params.p_blind_untreated = 0.9;
  in.params.p_regress = 0.9;
  RunManifest manifest;
  manifest.strategies = {in.status_quo};
  manifest.frequencies = {Frequency::Annual};
  auto rows = run_grid(in, manifest);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    CHECK(!row.error.empty());
    CHECK(!row.result.has_value());
  }

  // error rows keep the csv rectangular
  fs::path dir = fs::temp_directory_path() / "drscreen_io_tests";
  fs::create_directories(dir);
  fs::path p = dir / "error_rows.csv";
  write_grid_csv(p.string(), rows, Provenance{0, "x"});
  std::ifstream f(p);
  std::string provline, header, line;
  std::getline(f, provline);
  std::getline(f, header);
  const auto expected = std::count(header.begin(), header.end(), ',');
  int data_rows = 0;
  while (std::getline(f, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == expected);
    CHECK(line.find("status") == std::string::npos);
    CHECK(line.find("error") != std::string::npos);
    ++data_rows;
  }
  CHECK(data_rows == 5);
}

TEST_CASE("report files are byte-identical across repeated runs") {
  ModelInputs in = load_config(config_path("example.json"));
  RunManifest manifest;
  manifest.frequencies = {Frequency::Annual};
  manifest.age_groups = {{20, 79}};
  manifest.workers = 3;
  Provenance prov{7, in.config_hash};

  fs::path dir = fs::temp_directory_path() / "drscreen_io_tests";
  fs::create_directories(dir);
  for (int round = 0; round < 2; ++round) {
    auto rows = run_grid(in, manifest);
    std::string suffix = round == 0 ? "_a.csv" : "_b.csv";
    write_grid_csv((dir / ("grid" + suffix)).string(), rows, prov);
    write_frontier_csv((dir / ("frontier" + suffix)).string(), rows, true, prov);
    write_incremental_table_csv((dir / ("table" + suffix)).string(), rows,
                                in.status_quo, prov);
    write_performance_csv((dir / ("perf" + suffix)).string(), in, prov);
  }
  CHECK(slurp(dir / "grid_a.csv") == slurp(dir / "grid_b.csv"));
  CHECK(slurp(dir / "frontier_a.csv") == slurp(dir / "frontier_b.csv"));
  CHECK(slurp(dir / "table_a.csv") == slurp(dir / "table_b.csv"));
  CHECK(slurp(dir / "perf_a.csv") == slurp(dir / "perf_b.csv"));

  // provenance line carries seed and config hash
  std::string head = slurp(dir / "grid_a.csv").substr(0, 200);
  CHECK(head.find("seed=7") != std::string::npos);
  CHECK(head.find(in.config_hash) != std::string::npos);
}

TEST_CASE("incremental table has the status quo plus eight strategy columns") {
  ModelInputs in = load_config(config_path("example.json"));
  RunManifest manifest;
  manifest.frequencies = {Frequency::Annual};
  manifest.age_groups = {{20, 79}};
  auto rows = run_grid(in, manifest);
  fs::path dir = fs::temp_directory_path() / "drscreen_io_tests";
  fs::create_directories(dir);
  fs::path p = dir / "table1.csv";
  write_incremental_table_csv(p.string(), rows, in.status_quo, Provenance{0, "x"});

  std::ifstream f(p);
  std::string provline, header;
  std::getline(f, provline);
  std::getline(f, header);
  // row label + status quo + 8 comparison strategies
  CHECK(std::count(header.begin(), header.end(), ',') == 9);
  int body_rows = 0;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) ++body_rows;
  CHECK(body_rows == 13);  // counts, cost categories, totals, effectiveness, CEA
}

TEST_CASE("frontier csv contains the pooled view and every cell view") {
  ModelInputs in = load_config(config_path("example.json"));
  RunManifest manifest;
  manifest.frequencies = {Frequency::Annual, Frequency::Every5Years};
  manifest.age_groups = {{20, 79}, {60, 79}};
  auto rows = run_grid(in, manifest);
  fs::path dir = fs::temp_directory_path() / "drscreen_io_tests";
  fs::create_directories(dir);
  fs::path p = dir / "frontier_views.csv";
  write_frontier_csv(p.string(), rows, true, Provenance{0, "x"});
  std::string text = slurp(p);
  CHECK(text.find("pooled,") != std::string::npos);
  CHECK(text.find("annual|20-79,") != std::string::npos);
  CHECK(text.find("every-5-years|60-79,") != std::string::npos);
}
