#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drscreen/cea.hpp"
#include "drscreen/inputs.hpp"
#include "drscreen/markov.hpp"

namespace drscreen {

// -- one-way (tornado) analysis --

struct TornadoRange {
  std::string path;
  double low = 0.0;
  double high = 0.0;
};

struct TornadoBar {
  std::string path;
  double low_input = 0.0;
  double high_input = 0.0;
  IcerResult icer_low, icer_high;  // scenario-vs-comparator ICER at each end
  double nmb_low = 0.0, nmb_high = 0.0;
  double width = 0.0;  // |nmb_high - nmb_low|; NMB is defined in every quadrant
  std::string error;   // non-empty when this parameter's rerun failed
};

// Reruns scenario and comparator with one parameter pinned at each range end,
// all else at base values. Bars come back sorted by width descending; a
// parameter outside both scenarios' causal path yields a zero-width bar.
// A range end that violates the parameter's domain fails that bar only.
std::vector<TornadoBar> tornado(const ModelInputs& base, const ScenarioSpec& scenario,
                                const ScenarioSpec& comparator,
                                const std::vector<TornadoRange>& ranges, double wtp);

// -- parameter threshold scanning --

struct SwitchPoint {
  double parameter_value = 0.0;
  std::string from_id;  // NMB-optimal scenario below the switch
  std::string to_id;    // NMB-optimal scenario above it
};

// Finds every parameter value in [lo, hi] where the identity of the
// NMB-optimal scenario changes: coarse grid scan for winner flips, then
// bisection of each flip to `tol` (in parameter units). Empty when flat.
std::vector<SwitchPoint> threshold_scan(const ModelInputs& base,
                                        const std::vector<ScenarioSpec>& candidates,
                                        const std::string& path, double lo, double hi,
                                        double wtp, int grid_steps = 40,
                                        double tol = 1e-4);

// Same scan over the WTP axis for fixed (cost, QALY) outcomes; NMB is linear
// in WTP so flips are exact crossings. Used against nmb_crossing_wtp.
struct StrategyOutcome {
  std::string id;
  double cost = 0.0;
  double qalys = 0.0;
};
std::vector<SwitchPoint> wtp_switch_scan(const std::vector<StrategyOutcome>& outcomes,
                                         double lo, double hi, int grid_steps = 40,
                                         double tol = 1e-6);

// -- probabilistic sensitivity analysis --

struct PsaDraw {
  std::vector<double> cost;   // per scenario, scenario order as submitted
  std::vector<double> qalys;
};

struct PsaResult {
  std::uint64_t master_seed = 0;
  int n_draws = 0;
  std::vector<std::string> scenario_ids;
  std::vector<PsaDraw> draws;  // draw-index order, independent of worker count
};

// Each draw d seeds its own generator from (master_seed, d), samples every
// varied parameter once, and evaluates all scenarios in that shared world
// (common random numbers across strategies). Draws are distributed over
// `workers` threads; results are identical for any worker count.
PsaResult run_psa(const ModelInputs& base, const std::vector<ScenarioSpec>& scenarios,
                  const std::vector<DistributionSpec>& specs, int n_draws,
                  std::uint64_t master_seed, int workers = 1);

// -- cost-effectiveness acceptability curve --

struct CeacTable {
  std::vector<double> wtp_grid;
  std::vector<std::string> strategies;
  std::vector<std::vector<double>> probability;  // [wtp][strategy], rows sum to 1
};

// P(strategy has the highest NMB) per WTP grid point; ties split equally.
CeacTable ceac(const PsaResult& psa, const std::vector<double>& wtp_grid);

// -- screening timeframe sweep --

struct HorizonRecord {
  int horizon_years = 0;
  CeaRecord cea;
};

// Reruns every scenario-vs-comparator comparison at each horizon.
std::vector<HorizonRecord> horizon_sweep(const ModelInputs& base,
                                         const std::vector<ScenarioSpec>& scenarios,
                                         const ScenarioSpec& comparator, int from_years,
                                         int to_years);

// First horizon (if any) at which a strategy's QALY-gaining ICER drops to the
// threshold or below.
std::optional<int> first_horizon_within(const std::vector<HorizonRecord>& records,
                                        const std::string& scenario_id,
                                        double threshold);

}  // namespace drscreen
