// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "drscreen/config.hpp"
#include "drscreen/grid.hpp"
#include "drscreen/rng.hpp"
#include "drscreen/sensitivity.hpp"
#include "support.hpp"

using namespace drscreen;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

ModelInputs shipped() {
  return load_config(std::string(DRSCREEN_CONFIG_DIR) + "/example.json");
}

ScenarioSpec annual_2079(const std::string& strategy) {
  ScenarioSpec s;
  s.strategy = strategy;
  s.frequency = Frequency::Annual;
  s.age_group = {20, 79};
  return s;
}

// 1. closed-form performance equals brute-force enumeration within 1e-12 for
//    the nine published strategies and 200 random trees; under 5 seconds.
void criterion_1() {
  auto t0 = Clock::now();
  bool pass = true;
  std::string worst;
  double max_err = 0.0;

  auto compare = [&](const StrategyTree& tree, const GraderRegistry& reg,
                     double prevalence, const std::string& label) {
    auto closed = closed_form_performance(tree, reg, prevalence);
    auto oracle = enumerate_performance(tree, reg, prevalence);
    double err = std::max({std::abs(closed.sensitivity - oracle.sensitivity),
                           std::abs(closed.specificity - oracle.specificity),
                           std::abs(closed.expected_cost_per_case -
                                    oracle.expected_cost_per_case) /
                               std::max(1.0, oracle.expected_cost_per_case)});
    if (err > max_err) {
      max_err = err;
      worst = label;
    }
    if (err > 1e-12) pass = false;
  };

  GraderRegistry reference = test::reference_registry();
  for (const auto& name : test::reference_strategies())
    compare(parse_strategy(name, reference), reference, 0.074, name);

  Rng rng(8675309);
  for (int i = 0; i < 200; ++i) {
    GraderRegistry reg = test::random_registry(rng, 2 + static_cast<int>(rng.uniform(0, 3)));
    StrategyTree tree = test::random_tree(rng, reg, 1 + static_cast<int>(rng.uniform(0, 8)));
    compare(tree, reg, rng.uniform(0.01, 0.99), "random tree " + std::to_string(i));
  }

  double elapsed = seconds_since(t0);
  if (elapsed >= 5.0) pass = false;
  report(1, pass,
         "oracle equivalence, 9 published + 200 random trees, max deviation " +
             fmt("%.2e", max_err) + " (tolerance 1e-12), " + fmt("%.2f s", elapsed) +
             " (limit 5 s)");
}

// 2. the published (accuracy, sensitivity, specificity) triples imply one
//    dataset prevalence within 0.005 absolute.
void criterion_2() {
  auto p1 = implied_prevalence(0.8189, 0.9615, 0.8074);
  auto p8 = implied_prevalence(0.9949, 0.9485, 0.9986);
  bool pass = p1 && p8 && std::abs(*p1 - *p8) < 0.005 &&
              std::abs(*p1 - 0.0746) < 5e-4 && std::abs(*p8 - 0.0739) < 5e-4;
  report(2, pass,
         "implied prevalence " + fmt("%.4f", p1.value_or(-1)) + " vs " +
             fmt("%.4f", p8.value_or(-1)) + ", difference " +
             fmt("%.4f", std::abs(p1.value_or(-1) - p8.value_or(-1))) +
             " (tolerance 0.005)");
}

// 3. the published incremental rows reproduce ICER/NMB/dominance cells.
void criterion_3() {
  auto t0 = Clock::now();
  const WtpPolicy policy{12684.0};
  bool pass = true;
  auto expect_ratio = [&](IcerResult r, double published, double tol) {
    if (r.kind != IcerKind::Ratio || std::abs(r.value - published) / published >= tol)
      pass = false;
  };
  auto expect_nmb = [&](double dc, double dq, double published, double tol) {
    double v = nmb(dc, dq, policy.wtp_3x());
    if (std::abs(v - published) / std::abs(published) >= tol) pass = false;
  };

  expect_ratio(icer(0.90e6, 146), 6194.0, 0.02);
  expect_ratio(icer(-0.29e6, -2387), 122.0, 0.02);
  expect_ratio(cost_per_blindness_year_averted(0.90e6, 426), 2116.0, 0.02);
  expect_nmb(7.57e6, -417, -23.44e6, 0.005);
  expect_nmb(-0.29e6, -2387, -90.53e6, 0.005);
  expect_nmb(0.90e6, 146, 4.64e6, 0.01);
  if (icer(7.57e6, -417).kind != IcerKind::Dominated) pass = false;    // strategy 1
  if (icer(11.89e6, -3445).kind != IcerKind::Dominated) pass = false;  // strategy 7
  if (icer(0.48e6, -759).kind != IcerKind::Dominated) pass = false;    // strategy 8

  double elapsed = seconds_since(t0);
  if (elapsed >= 1.0) pass = false;
  report(3, pass,
         "published CEA cells: ICER 6194/122 +-2%, cost-per-blindness-year 2116 +-2%, "
         "NMB -23.44M/-90.53M +-0.5%, +4.64M +-1%, dominance tags exact, " +
             fmt("%.3f s", elapsed) + " (limit 1 s)");
}

// 4. occupancy mass conserved within 1e-9 (relative to cohort size) every
//    cycle across all 270 scenarios; degenerate cohorts exact; under 60 s.
void criterion_4() {
  auto t0 = Clock::now();
  ModelInputs inputs = shipped();
  RunManifest manifest;
  auto grid = expand_grid(inputs, manifest);
  bool pass = grid.size() == 270;
  double worst = 0.0;

  for (const auto& spec : grid) {
    StrategyTree tree = inputs.parse(spec.strategy);
    DiagnosticPerformance perf = closed_form_performance(
        tree, inputs.graders, inputs.params.screening_prevalence);
    CohortTrace trace = run_cohort(spec, inputs.params, perf);
    for (const auto& cyc : trace.cycles) {
      double sum = 0.0;
      for (double v : cyc.occupancy) sum += v;
      worst = std::max(worst, std::abs(sum - spec.cohort_size) / spec.cohort_size);
    }
  }
  if (worst > 1e-9) pass = false;

  // frozen cohort: no transitions, no discounting, exact utility accrual
  {
    MarkovParameters p = inputs.params;
    p.p_onset = AgeCurve{0.0, {}};
    p.p_blind_untreated = p.p_blind_treated = p.p_regress = 0.0;
    p.life_table = LifeTable::flat(0.0);
    p.utility = {1, 0, 0, 0, 0, 0};
    p.discount_rate_cost = p.discount_rate_effect = 0.0;
    // ten age bands split the cohort into exactly representable shares
    p.initial = InitialCohort{40, 49, {}, {1, 0, 0, 0, 0, 0}};
    p.screening_prevalence = 0.074;
    ScenarioSpec s = annual_2079("frozen");
    s.age_group = {90, 95};
    s.cohort_size = 100.0;
    s.horizon_years = 10;
    CohortTrace trace = run_cohort(s, p, DiagnosticPerformance{0.9, 0.9, 1, 1, 0});
    if (trace.total_qalys() != 1000.0) pass = false;

    p.initial.state_mix = {0, 0, 0, 0, 0, 1};  // everyone dead
    p.utility = {1, 0.5, 0.5, 0.5, 0.1, 0};
    CohortTrace dead = run_cohort(s, p, DiagnosticPerformance{0.9, 0.9, 1, 1, 0});
    if (dead.total_qalys() != 0.0 || dead.total_cost_disc(Perspective::Societal) != 0.0)
      pass = false;
  }

  double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) pass = false;
  report(4, pass,
         "mass conservation across 270 scenarios, worst relative drift " +
             fmt("%.2e", worst) + " (tolerance 1e-9), degenerate cohorts exact, " +
             fmt("%.2f s", elapsed) + " (limit 60 s)");
}

// 5. PSA: point-mass collapse exact, seeded reruns bit-identical, CEAC rows
//    normalized; 10,000 draws x 9 strategies under 5 minutes.
void criterion_5() {
  auto t0 = Clock::now();
  ModelInputs inputs = shipped();
  bool pass = true;

  std::vector<ScenarioSpec> scenarios;
  for (const auto& s : inputs.strategies) scenarios.push_back(annual_2079(s));
  const int workers =
      static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));

  // point-mass collapse
  {
    std::vector<DistributionSpec> degenerate;
    for (auto spec : inputs.psa_distributions) {
      DistributionSpec d;
      d.path = spec.path;
      d.family = param_domain(spec.path).is_cost ? DistFamily::Gamma : DistFamily::Beta;
      d.mean = get_param(inputs, spec.path);
      d.rel_sd = 0.0;
      degenerate.push_back(d);
    }
    PsaResult collapse = run_psa(inputs, scenarios, degenerate, 2, 1, 1);
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      ScenarioResult det = evaluate_scenario(inputs, scenarios[i]);
      for (const auto& draw : collapse.draws)
        if (draw.cost[i] != det.total_cost || draw.qalys[i] != det.qalys) pass = false;
    }
  }

  // full-size run plus a bit-identical repeat
  PsaResult psa =
      run_psa(inputs, scenarios, inputs.psa_distributions, 10000, 20240807, workers);
  PsaResult again =
      run_psa(inputs, scenarios, inputs.psa_distributions, 10000, 20240807, workers);
  for (std::size_t d = 0; d < psa.draws.size(); ++d)
    for (std::size_t s = 0; s < scenarios.size(); ++s)
      if (psa.draws[d].cost[s] != again.draws[d].cost[s] ||
          psa.draws[d].qalys[s] != again.draws[d].qalys[s])
        pass = false;

  std::vector<double> grid;
  for (int k = 0; k <= 60; ++k) grid.push_back(76104.0 * k / 60);
  CeacTable table = ceac(psa, grid);
  double worst_sum = 0.0;
  for (const auto& row : table.probability) {
    double sum = 0.0;
    for (double p : row) sum += p;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  if (worst_sum > 1e-9) pass = false;

  double elapsed = seconds_since(t0);
  if (elapsed >= 300.0) pass = false;
  report(5, pass,
         "PSA point-mass collapse exact, 2x10,000 seeded draws bit-identical, CEAC "
         "normalization drift " +
             fmt("%.2e", worst_sum) + " (tolerance 1e-9), " + fmt("%.1f s", elapsed) +
             " (limit 300 s)");
}

// 6. bisection WTP switch point equals the NMB-linearity closed form within
//    1e-6 relative on synthetic strategy outcomes.
void criterion_6() {
  Rng rng(424242);
  bool pass = true;
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    StrategyOutcome a{"a", rng.uniform(0, 1e6), rng.uniform(0, 400)};
    StrategyOutcome b{"b", rng.uniform(0, 1e6), rng.uniform(0, 400)};
    if (a.qalys == b.qalys) continue;
    auto closed = nmb_crossing_wtp(a.cost, a.qalys, b.cost, b.qalys);
    if (!closed || *closed <= 0.0 || *closed >= 1e5) continue;
    auto switches = wtp_switch_scan({a, b}, 0.0, 1e5, 64, 1e-9);
    if (switches.size() != 1) {
      pass = false;
      continue;
    }
    double rel = std::abs(switches[0].parameter_value - *closed) / *closed;
    worst = std::max(worst, rel);
    if (rel > 1e-6) pass = false;
    ++checked;
  }
  if (checked < 20) pass = false;
  report(6, pass,
         "WTP switch bisection vs closed form on " + std::to_string(checked) +
             " synthetic pairs, worst relative gap " + fmt("%.2e", worst) +
             " (tolerance 1e-6)");
}

// 7. desk-scale reproducibility statement: the published absolute totals and
//    the PSA percentages depend on unpublished parameter tables, so they are
//    checked for sign and ordering only. Under the shipped calibrated config
//    the copilot strategy must be the sole strategy with positive
//    incremental QALYs and blindness-free years versus the status quo.
void criterion_7() {
  ModelInputs inputs = shipped();
  RunManifest manifest;
  manifest.frequencies = {Frequency::Annual};
  manifest.age_groups = {{20, 79}};
  auto rows = run_grid(inputs, manifest);
  bool pass = rows.size() == 9;

  const std::string copilot = "AI\xC2\xB7M+M2";
  double sq_total = 0.0, sq_qalys = 0.0;
  std::string classes;
  for (const auto& row : rows) {
    if (!row.result || !row.cea) {
      pass = false;
      continue;
    }
    if (row.spec.strategy == inputs.status_quo) {
      sq_total = row.result->total_cost;
      sq_qalys = row.result->qalys;
      continue;
    }
    const bool gains = row.cea->delta_qalys > 0.0 &&
                       row.cea->delta_blindfree_years > 0.0;
    if (row.spec.strategy == copilot) {
      if (!gains) pass = false;
      // the only cost-effective alternative to the status quo
      if (row.cea->ce_class != CeClass::VeryCostEffective &&
          row.cea->ce_class != CeClass::CostEffective && 
          row.cea->ce_class != CeClass::Dominant)
        pass = false;
    } else {
      if (gains) pass = false;
      if (row.cea->ce_class == CeClass::VeryCostEffective ||
          row.cea->ce_class == CeClass::CostEffective || 
          row.cea->ce_class == CeClass::Dominant)
        pass = false;
    }
  }
  // absolute totals are order-of-magnitude only (unpublished parameter tables)
  if (sq_total < 5e8 || sq_total > 5e9) pass = false;
  if (sq_qalys < 8e5 || sq_qalys > 2e6) pass = false;

  report(7, pass,
         "sign/ordering consistency: copilot is the sole QALY- and "
         "blindness-year-gaining strategy and the only cost-effective one; status-quo "
         "totals order-of-magnitude (cost " +
             fmt("%.0f", sq_total / 1e6) + "M, QALYs " + fmt("%.0f", sq_qalys) +
             "). Published absolute cells are soft targets by design.");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  std::printf("%d of 7 criteria passed\n", 7 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
