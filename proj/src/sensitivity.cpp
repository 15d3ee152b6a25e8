#include "drscreen/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "drscreen/rng.hpp"

namespace drscreen {

namespace {

CeaRecord compare(const ModelInputs& in, const ScenarioSpec& scenario,
                  const ScenarioSpec& comparator) {
  ScenarioResult s = evaluate_scenario(in, scenario);
  ScenarioResult c = evaluate_scenario(in, comparator);
  return make_cea_record(s, c, in.wtp);
}

}  // namespace

std::vector<TornadoBar> tornado(const ModelInputs& base, const ScenarioSpec& scenario,
                                const ScenarioSpec& comparator,
                                const std::vector<TornadoRange>& ranges, double wtp) {
  std::vector<TornadoBar> bars;
  bars.reserve(ranges.size());
  for (const auto& range : ranges) {
    TornadoBar bar;
    bar.path = range.path;
    bar.low_input = range.low;
    bar.high_input = range.high;
    try {
      ModelInputs lo = base;
      set_param(lo, range.path, range.low);
      CeaRecord rec_lo = compare(lo, scenario, comparator);
      ModelInputs hi = base;
      set_param(hi, range.path, range.high);
      CeaRecord rec_hi = compare(hi, scenario, comparator);
      bar.icer_low = rec_lo.icer;
      bar.icer_high = rec_hi.icer;
      bar.nmb_low = nmb(rec_lo.delta_cost, rec_lo.delta_qalys, wtp);
      bar.nmb_high = nmb(rec_hi.delta_cost, rec_hi.delta_qalys, wtp);
      bar.width = std::abs(bar.nmb_high - bar.nmb_low);
    } catch (const std::exception& e) {
      bar.error = e.what();  // this parameter only; the rest proceed
    }
    bars.push_back(std::move(bar));
  }
  std::stable_sort(bars.begin(), bars.end(), [](const TornadoBar& a, const TornadoBar& b) {
    if (a.error.empty() != b.error.empty()) return a.error.empty();
    return a.width > b.width;
  });
  return bars;
}

namespace {

struct ScanPoint {
  int winner = -1;
  std::vector<double> nmb_values;
};

}  // namespace

std::vector<SwitchPoint> threshold_scan(const ModelInputs& base,
                                        const std::vector<ScenarioSpec>& candidates,
                                        const std::string& path, double lo, double hi,
                                        double wtp, int grid_steps, double tol) {
  if (candidates.size() < 2)
    throw DomainError("threshold scan needs at least two candidate scenarios");
  if (!(lo < hi)) throw DomainError("threshold scan range must satisfy lo < hi");
  if (grid_steps < 1) grid_steps = 1;

  auto winner_at = [&](double x) {
    ModelInputs in = base;
    set_param(in, path, x);
    int best = 0;
    double best_nmb = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      ScenarioResult r = evaluate_scenario(in, candidates[i]);
      double v = wtp * r.qalys - r.total_cost;
      if (i == 0 || v > best_nmb) {
        best = static_cast<int>(i);
        best_nmb = v;
      }
    }
    return best;
  };

  std::vector<SwitchPoint> switches;
  double x_prev = lo;
  int w_prev = winner_at(lo);
  for (int k = 1; k <= grid_steps; ++k) {
    double x = lo + (hi - lo) * k / grid_steps;
    int w = winner_at(x);
    if (w != w_prev) {
      // bisect the flip between the two cell edges
      double a = x_prev, b = x;
      int wa = w_prev;
      while (b - a > tol) {
        double m = 0.5 * (a + b);
        if (winner_at(m) == wa)
          a = m;
        else
          b = m;
      }
      switches.push_back({0.5 * (a + b), candidates[w_prev].id(), candidates[w].id()});
    }
    x_prev = x;
    w_prev = w;
  }
  return switches;
}

std::vector<SwitchPoint> wtp_switch_scan(const std::vector<StrategyOutcome>& outcomes,
                                         double lo, double hi, int grid_steps,
                                         double tol) {
  if (outcomes.size() < 2)
    throw DomainError("wtp switch scan needs at least two strategies");
  if (!(lo < hi)) throw DomainError("wtp scan range must satisfy lo < hi");

  auto winner_at = [&](double w) {
    int best = 0;
    double best_nmb = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      double v = w * outcomes[i].qalys - outcomes[i].cost;
      if (i == 0 || v > best_nmb) {
        best = static_cast<int>(i);
        best_nmb = v;
      }
    }
    return best;
  };

  std::vector<SwitchPoint> switches;
  double x_prev = lo;
  int w_prev = winner_at(lo);
  for (int k = 1; k <= grid_steps; ++k) {
    double x = lo + (hi - lo) * k / grid_steps;
    int w = winner_at(x);
    if (w != w_prev) {
      double a = x_prev, b = x;
      int wa = w_prev;
      // relative tolerance on the WTP axis
      while (b - a > tol * std::max(1.0, std::abs(a))) {
        double m = 0.5 * (a + b);
        if (winner_at(m) == wa)
          a = m;
        else
          b = m;
      }
      switches.push_back({0.5 * (a + b), outcomes[w_prev].id, outcomes[w].id});
    }
    x_prev = x;
    w_prev = w;
  }
  return switches;
}

PsaResult run_psa(const ModelInputs& base, const std::vector<ScenarioSpec>& scenarios,
                  const std::vector<DistributionSpec>& specs, int n_draws,
                  std::uint64_t master_seed, int workers) {
  if (n_draws < 1) throw DomainError("PSA needs at least one draw");
  for (const auto& spec : specs) {
    spec.validate_hyperparameters();
    const ParamDomain dom = param_domain(spec.path);
    if (spec.family == DistFamily::Beta && !dom.is_probability)
      throw DomainError("distribution for '" + spec.path +
                        "': beta is reserved for probabilities");
    if (spec.family == DistFamily::Gamma && !dom.is_cost)
      throw DomainError("distribution for '" + spec.path +
                        "': gamma is reserved for non-negative costs");
    get_param(base, spec.path);  // path must resolve
  }

  PsaResult result;
  result.master_seed = master_seed;
  result.n_draws = n_draws;
  for (const auto& s : scenarios) result.scenario_ids.push_back(s.id());
  result.draws.resize(static_cast<std::size_t>(n_draws));

  // a draw whose sampled world violates a cross-parameter invariant aborts
  // the analysis with the draw index, never a silent skip
  std::mutex error_mutex;
  std::exception_ptr first_error;
  int first_error_draw = -1;

  auto run_range = [&](int begin, int end) {
    for (int d = begin; d < end; ++d) {
      try {
        Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(d)));
        ModelInputs in = base;
        for (const auto& spec : specs) {
          double v = spec.sample(rng);
          set_param(in, spec.path, v);  // domained families cannot leave range
        }
        PsaDraw draw;
        draw.cost.reserve(scenarios.size());
        draw.qalys.reserve(scenarios.size());
        for (const auto& scen : scenarios) {
          ScenarioResult r = evaluate_scenario(in, scen);
          draw.cost.push_back(r.total_cost);
          draw.qalys.push_back(r.qalys);
        }
        result.draws[static_cast<std::size_t>(d)] = std::move(draw);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error || d < first_error_draw) {
          first_error = std::current_exception();
          first_error_draw = d;
        }
        return;
      }
    }
  };

  workers = std::max(1, workers);
  if (workers == 1 || n_draws < 2 * workers) {
    run_range(0, n_draws);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_draws + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int begin = w * chunk;
      int end = std::min(n_draws, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      throw DomainError("PSA draw " + std::to_string(first_error_draw) +
                        " failed: " + e.what());
    }
  }
  return result;
}

CeacTable ceac(const PsaResult& psa, const std::vector<double>& wtp_grid) {
  if (psa.draws.empty()) throw DomainError("CEAC needs a non-empty PSA result");
  for (std::size_t i = 1; i < wtp_grid.size(); ++i)
    if (!(wtp_grid[i] > wtp_grid[i - 1]))
      throw DomainError("CEAC WTP grid must be strictly ascending");

  const std::size_t n_strat = psa.scenario_ids.size();
  CeacTable table;
  table.wtp_grid = wtp_grid;
  table.strategies = psa.scenario_ids;
  table.probability.assign(wtp_grid.size(), std::vector<double>(n_strat, 0.0));

  std::vector<double> nmb_values(n_strat);
  for (std::size_t w = 0; w < wtp_grid.size(); ++w) {
    for (const auto& draw : psa.draws) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < n_strat; ++s) {
        nmb_values[s] = wtp_grid[w] * draw.qalys[s] - draw.cost[s];
        best = std::max(best, nmb_values[s]);
      }
      int ties = 0;
      for (std::size_t s = 0; s < n_strat; ++s)
        if (nmb_values[s] == best) ++ties;
      for (std::size_t s = 0; s < n_strat; ++s)
        if (nmb_values[s] == best) table.probability[w][s] += 1.0 / ties;
    }
    for (std::size_t s = 0; s < n_strat; ++s)
      table.probability[w][s] /= static_cast<double>(psa.draws.size());
  }
  return table;
}

std::vector<HorizonRecord> horizon_sweep(const ModelInputs& base,
                                         const std::vector<ScenarioSpec>& scenarios,
                                         const ScenarioSpec& comparator, int from_years,
                                         int to_years) {
  if (from_years > to_years) throw DomainError("horizon sweep range is empty");
  if (from_years < 0) throw DomainError("horizon sweep years must be non-negative");
  std::vector<HorizonRecord> records;
  for (int h = from_years; h <= to_years; ++h) {
    if (h == 0) {
      // no cycles run: zero deltas, undefined ratios
      ScenarioResult empty;
      for (const auto& scen : scenarios) {
        ScenarioResult zero = empty;
        zero.scenario_id = scen.id();
        ScenarioResult comp_zero = empty;
        comp_zero.scenario_id = comparator.id();
        records.push_back({0, make_cea_record(zero, comp_zero, base.wtp)});
      }
      continue;
    }
    ScenarioSpec comp = comparator;
    comp.horizon_years = h;
    ScenarioResult comp_result = evaluate_scenario(base, comp);
    for (const auto& scen : scenarios) {
      ScenarioSpec s = scen;
      s.horizon_years = h;
      ScenarioResult r = evaluate_scenario(base, s);
      records.push_back({h, make_cea_record(r, comp_result, base.wtp)});
    }
  }
  return records;
}

std::optional<int> first_horizon_within(const std::vector<HorizonRecord>& records,
                                        const std::string& scenario_id,
                                        double threshold) {
  std::optional<int> found;
  for (const auto& rec : records) {
    if (rec.cea.scenario_id != scenario_id) continue;
    const IcerResult& r = rec.cea.icer;
    const bool within =
        (r.kind == IcerKind::Dominant) ||
        (r.kind == IcerKind::Ratio && r.effect_gained && r.value <= threshold);
    if (within && (!found || rec.horizon_years < *found)) found = rec.horizon_years;
  }
  return found;
}

}  // namespace drscreen
