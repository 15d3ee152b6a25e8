// drscreen: cost-effectiveness simulator for human-AI collaborative
// diabetic-retinopathy screening strategies.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "drscreen/config.hpp"
#include "drscreen/grid.hpp"
#include "drscreen/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace drscreen;

namespace {

struct CommonOptions {
  std::vector<std::string> configs;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string perspective = "societal";
  std::vector<std::string> strategies;
  std::vector<std::string> frequencies;
  std::vector<std::string> ages;
  int horizon = 0;  // 0 = default (to age 80)
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.configs, "configuration file(s), later files override")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--seed", opt.seed, "master seed for stochastic analyses");
  cmd->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
  cmd->add_option("--perspective", opt.perspective, "societal | provider")
      ->check(CLI::IsMember({"societal", "provider"}));
  cmd->add_option("--strategies", opt.strategies, "strategy filter (expressions)");
  cmd->add_option("--frequencies", opt.frequencies,
                  "frequency filter (one-off, annual, every-2-years, ...)");
  cmd->add_option("--ages", opt.ages, "age-group filter (e.g. 20-79)");
  cmd->add_option("--horizon", opt.horizon, "horizon override in years");
}

RunManifest make_manifest(const CommonOptions& opt, const ModelInputs& inputs) {
  RunManifest m;
  m.out_dir = opt.out_dir;
  m.seed = opt.seed;
  m.workers = opt.workers == 0
                  ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                  : opt.workers;
  m.perspective =
      opt.perspective == "provider" ? Perspective::Provider : Perspective::Societal;
  if (opt.horizon > 0) m.horizon = opt.horizon;
  for (const auto& s : opt.strategies) {
    if (std::find(inputs.strategies.begin(), inputs.strategies.end(), s) ==
        inputs.strategies.end())
      throw ConfigError("--strategies: '" + s + "' is not a configured strategy");
    m.strategies.push_back(s);
  }
  for (const auto& f : opt.frequencies) {
    auto freq = frequency_from_string(f);
    if (!freq) throw ConfigError("--frequencies: unknown frequency '" + f + "'");
    m.frequencies.push_back(*freq);
  }
  for (const auto& a : opt.ages) {
    bool found = false;
    for (const AgeGroup& g : standard_age_groups())
      if (to_string(g) == a) {
        m.age_groups.push_back(g);
        found = true;
      }
    if (!found) throw ConfigError("--ages: unknown age group '" + a + "'");
  }
  return m;
}

Provenance provenance(const RunManifest& m, const ModelInputs& inputs) {
  fs::create_directories(m.out_dir);
  return Provenance{m.seed, inputs.config_hash};
}

std::string out_path(const RunManifest& m, const char* name) {
  return (fs::path(m.out_dir) / name).string();
}

// the reference cell used by the focused analyses
std::vector<ScenarioSpec> reference_cell(const ModelInputs& inputs, const RunManifest& m) {
  std::vector<ScenarioSpec> scenarios;
  const auto& strategies = m.strategies.empty() ? inputs.strategies : m.strategies;
  for (const auto& s : strategies) {
    ScenarioSpec spec;
    spec.strategy = s;
    spec.frequency = m.frequencies.empty() ? Frequency::Annual : m.frequencies.front();
    spec.age_group = m.age_groups.empty() ? AgeGroup{20, 79} : m.age_groups.front();
    spec.cohort_size = inputs.cohort_size;
    spec.perspective = m.perspective;
    spec.horizon_years = m.horizon;
    scenarios.push_back(std::move(spec));
  }
  return scenarios;
}

ScenarioSpec comparator_of(const ModelInputs& inputs, const std::vector<ScenarioSpec>& cell) {
  ScenarioSpec comp = cell.front();
  comp.strategy = inputs.status_quo;
  return comp;
}

int run_validate(const CommonOptions& opt) {
  ModelInputs inputs = load_config(opt.configs);
  std::printf("config ok: %zu graders, %zu strategies, config_hash=%s\n",
              inputs.graders.profiles().size(), inputs.strategies.size(),
              inputs.config_hash.c_str());
  return 0;
}

int run_perf(const CommonOptions& opt) {
  ModelInputs inputs = load_config(opt.configs);
  RunManifest m = make_manifest(opt, inputs);
  write_performance_csv(out_path(m, "strategy_performance.csv"), inputs,
                        provenance(m, inputs));
  for (const auto& expr : inputs.strategies) {
    DiagnosticPerformance perf = closed_form_performance(
        inputs.parse(expr), inputs.graders, inputs.params.screening_prevalence);
    std::printf("%-14s se=%.4f sp=%.4f acc=%.4f cost/case=%.3f\n", expr.c_str(),
                perf.sensitivity, perf.specificity,
                accuracy(perf, inputs.params.screening_prevalence),
                perf.expected_cost_per_case);
  }
  std::printf("wrote %s\n", out_path(m, "strategy_performance.csv").c_str());
  return 0;
}

int run_run(const CommonOptions& opt) {
  ModelInputs inputs = load_config(opt.configs);
  RunManifest m = make_manifest(opt, inputs);
  Provenance prov = provenance(m, inputs);
  std::vector<GridRow> rows = run_grid(inputs, m);
  write_grid_csv(out_path(m, "grid.csv"), rows, prov);
  write_frontier_csv(out_path(m, "frontier.csv"), rows, true, prov);
  write_incremental_table_csv(out_path(m, "incremental_table.csv"), rows,
                              inputs.status_quo, prov);
  write_performance_csv(out_path(m, "strategy_performance.csv"), inputs, prov);
  int failures = 0;
  for (const auto& row : rows)
    if (!row.error.empty()) ++failures;
  std::printf("evaluated %zu scenarios (%d failed); wrote grid.csv, frontier.csv, "
              "incremental_table.csv, strategy_performance.csv under %s\n",
              rows.size(), failures, m.out_dir.c_str());
  return failures == 0 ? 0 : 1;
}

int run_frontier(const CommonOptions& opt) {
  ModelInputs inputs = load_config(opt.configs);
  RunManifest m = make_manifest(opt, inputs);
  Provenance prov = provenance(m, inputs);
  std::vector<GridRow> rows = run_grid(inputs, m);
  write_frontier_csv(out_path(m, "frontier.csv"), rows, true, prov);
  std::printf("wrote %s\n", out_path(m, "frontier.csv").c_str());
  return 0;
}

int run_tornado(const CommonOptions& opt, const std::vector<std::string>& param_ranges,
                const std::string& scenario_override, const std::string& scan_param,
                double scan_lo, double scan_hi) {
  ModelInputs inputs = load_config(opt.configs);
  RunManifest m = make_manifest(opt, inputs);
  Provenance prov = provenance(m, inputs);
  std::vector<ScenarioSpec> cell = reference_cell(inputs, m);

  ScenarioSpec comparator = comparator_of(inputs, cell);
  // default comparison: the strategy with the highest NMB against the status quo
  ScenarioSpec scenario = cell.front();
  if (!scenario_override.empty()) {
    bool found = false;
    for (const auto& s : cell)
      if (s.strategy == scenario_override) {
        scenario = s;
        found = true;
      }
    if (!found)
      throw ConfigError("--scenario: '" + scenario_override + "' is not in the strategy set");
  } else {
    ScenarioResult comp_result = evaluate_scenario(inputs, comparator);
    double best = 0.0;
    bool first = true;
    for (const auto& s : cell) {
      if (s.strategy == inputs.status_quo) continue;
      ScenarioResult r = evaluate_scenario(inputs, s);
      CeaRecord rec = make_cea_record(r, comp_result, inputs.wtp);
      if (first || rec.nmb_3x > best) {
        best = rec.nmb_3x;
        scenario = s;
        first = false;
      }
    }
  }

  std::vector<TornadoRange> ranges;
  if (!param_ranges.empty()) {
    for (const auto& pr : param_ranges) {
      // path=lo:hi
      auto eq = pr.find('=');
      auto colon = pr.find(':', eq == std::string::npos ? 0 : eq);
      if (eq == std::string::npos || colon == std::string::npos)
        throw ConfigError("--param expects path=low:high, got '" + pr + "'");
      ranges.push_back({pr.substr(0, eq), std::stod(pr.substr(eq + 1, colon - eq - 1)),
                        std::stod(pr.substr(colon + 1))});
    }
  } else {
    for (const auto& [path, range] : load_tornado_config(opt.configs, inputs).ranges)
      ranges.push_back({path, range.first, range.second});
  }
  if (ranges.empty())
    throw ConfigError("no tornado ranges: configure tornado.ranges, psa.distributions, "
                      "or pass --param");

  std::vector<TornadoBar> bars =
      tornado(inputs, scenario, comparator, ranges, inputs.wtp.wtp_3x());
  write_tornado_csv(out_path(m, "tornado.csv"), bars, prov);
  std::printf("tornado: %zu bars (%s vs %s); wrote %s\n", bars.size(),
              scenario.strategy.c_str(), comparator.strategy.c_str(),
              out_path(m, "tornado.csv").c_str());

  if (!scan_param.empty()) {
    std::vector<SwitchPoint> switches =
        threshold_scan(inputs, cell, scan_param, scan_lo, scan_hi, inputs.wtp.wtp_3x());
    write_threshold_csv(out_path(m, "threshold_scan.csv"), switches, scan_param, prov);
    for (const auto& sw : switches)
      std::printf("switch at %s=%.6g: %s -> %s\n", scan_param.c_str(),
                  sw.parameter_value, sw.from_id.c_str(), sw.to_id.c_str());
    if (switches.empty())
      std::printf("no optimum switch for %s in [%g, %g]\n", scan_param.c_str(), scan_lo,
                  scan_hi);
  }
  return 0;
}

int run_psa_cmd(const CommonOptions& opt, int draws, bool emit_draws, bool with_ceac,
                double wtp_max, int wtp_steps) {
  ModelInputs inputs = load_config(opt.configs);
  RunManifest m = make_manifest(opt, inputs);
  Provenance prov = provenance(m, inputs);
  std::vector<ScenarioSpec> cell = reference_cell(inputs, m);
  const int n = draws > 0 ? draws : inputs.psa_draws;

  PsaResult psa = run_psa(inputs, cell, inputs.psa_distributions, n, m.seed, m.workers);
  write_psa_summary_csv(out_path(m, "psa_summary.csv"), psa, inputs, prov);
  std::printf("psa: %d draws x %zu scenarios; wrote %s\n", n, cell.size(),
              out_path(m, "psa_summary.csv").c_str());
  if (emit_draws) {
    write_psa_draws_csv(out_path(m, "psa_draws.csv"), psa, prov);
    std::printf("wrote %s\n", out_path(m, "psa_draws.csv").c_str());
  }
  if (with_ceac) {
    std::vector<double> grid;
    const double max_wtp = wtp_max > 0 ? wtp_max : 2.0 * inputs.wtp.wtp_3x();
    for (int k = 0; k <= wtp_steps; ++k)
      grid.push_back(max_wtp * k / wtp_steps);
    CeacTable table = ceac(psa, grid);
    write_ceac_csv(out_path(m, "ceac.csv"), table, prov);
    std::printf("wrote %s\n", out_path(m, "ceac.csv").c_str());
  }
  return 0;
}

int run_sweep(const CommonOptions& opt, int from_years, int to_years) {
  ModelInputs inputs = load_config(opt.configs);
  RunManifest m = make_manifest(opt, inputs);
  Provenance prov = provenance(m, inputs);
  std::vector<ScenarioSpec> cell = reference_cell(inputs, m);
  std::vector<ScenarioSpec> others;
  for (const auto& s : cell)
    if (s.strategy != inputs.status_quo) others.push_back(s);
  ScenarioSpec comparator = comparator_of(inputs, cell);

  std::vector<HorizonRecord> records =
      horizon_sweep(inputs, others, comparator, from_years, to_years);
  write_horizon_csv(out_path(m, "horizon_sweep.csv"), records, prov);
  write_horizon_crossings_csv(out_path(m, "horizon_crossings.csv"), records, inputs,
                              prov);
  std::printf("sweep: horizons %d..%d; wrote horizon_sweep.csv, horizon_crossings.csv "
              "under %s\n",
              from_years, to_years, m.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-effectiveness simulator for diabetic-retinopathy screening "
               "strategies (human, AI, and collaborative pipelines)"};
  app.require_subcommand(1);

  CommonOptions opt;
  int psa_draws = 0;
  bool emit_draws = false;
  double wtp_max = 0.0;
  int wtp_steps = 60;
  int sweep_from = 5, sweep_to = 30;
  std::vector<std::string> tornado_params;
  std::string tornado_scenario;
  std::string scan_param;
  double scan_lo = 0.0, scan_hi = 0.0;

  CLI::App* validate = app.add_subcommand("validate", "load and validate the configuration");
  add_common(validate, opt);

  CLI::App* perf = app.add_subcommand("perf", "composed diagnostic performance per strategy");
  add_common(perf, opt);

  CLI::App* run = app.add_subcommand("run", "evaluate the scenario grid with CEA vs the status quo");
  add_common(run, opt);

  CLI::App* front = app.add_subcommand("frontier", "cost-effectiveness frontier per cell and pooled");
  add_common(front, opt);

  CLI::App* torn = app.add_subcommand("tornado", "one-way sensitivity analysis (and optional threshold scan)");
  add_common(torn, opt);
  torn->add_option("--param", tornado_params, "explicit range: path=low:high (repeatable)");
  torn->add_option("--scenario", tornado_scenario,
                   "strategy to compare against the status quo (default: highest NMB)");
  torn->add_option("--scan-param", scan_param, "parameter path for an optimum-switch scan");
  torn->add_option("--scan-lo", scan_lo, "scan lower bound");
  torn->add_option("--scan-hi", scan_hi, "scan upper bound");

  CLI::App* psa = app.add_subcommand("psa", "probabilistic sensitivity analysis");
  add_common(psa, opt);
  psa->add_option("--draws", psa_draws, "number of Monte Carlo draws (default from config)");
  psa->add_flag("--emit-draws", emit_draws, "also write per-draw results");

  CLI::App* ceac_cmd = app.add_subcommand("ceac", "PSA plus cost-effectiveness acceptability curve");
  add_common(ceac_cmd, opt);
  ceac_cmd->add_option("--draws", psa_draws, "number of Monte Carlo draws");
  ceac_cmd->add_flag("--emit-draws", emit_draws, "also write per-draw results");
  ceac_cmd->add_option("--wtp-max", wtp_max, "top of the WTP grid (default 2x the 3xGDP threshold)");
  ceac_cmd->add_option("--wtp-steps", wtp_steps, "number of WTP grid intervals");

  CLI::App* sweep = app.add_subcommand("sweep", "screening timeframe sweep");
  add_common(sweep, opt);
  sweep->add_option("--from", sweep_from, "first horizon in years");
  sweep->add_option("--to", sweep_to, "last horizon in years");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_validate(opt);
    if (perf->parsed()) return run_perf(opt);
    if (run->parsed()) return run_run(opt);
    if (front->parsed()) return run_frontier(opt);
    if (torn->parsed())
      return run_tornado(opt, tornado_params, tornado_scenario, scan_param, scan_lo, scan_hi);
    if (psa->parsed()) return run_psa_cmd(opt, psa_draws, emit_draws, false, wtp_max, wtp_steps);
    if (ceac_cmd->parsed()) return run_psa_cmd(opt, psa_draws, emit_draws, true, wtp_max, wtp_steps);
    if (sweep->parsed()) return run_sweep(opt, sweep_from, sweep_to);
  } catch (const std::exception& e) {
    // machine-readable error summary on stderr
    std::string msg = e.what();
    std::string escaped;
    for (char c : msg) {
      if (c == '"' || c == '\\') escaped.push_back('\\');
      if (c == '\n') {
        escaped += "\\n";
        continue;
      }
      escaped.push_back(c);
    }
    std::fprintf(stderr, "{\"error\": \"%s\"}\n", escaped.c_str());
    return 1;
  }
  return 0;
}
