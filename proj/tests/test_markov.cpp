#include <doctest.h>

#include <cmath>
#include <cstring>

#include "drscreen/markov.hpp"

using namespace drscreen;

namespace {

MarkovParameters basic_params() {
  MarkovParameters p;
  p.p_onset.base = 0.02;
  p.p_blind_untreated = 0.08;
  p.p_blind_treated = 0.012;
  p.p_regress = 0.02;
  p.life_table = LifeTable::flat(0.01);
  p.utility = {0.85, 0.75, 0.75, 0.80, 0.50, 0.0};
  p.referral_cost = 120.0;
  p.treatment_cost_initial = 2000.0;
  p.treatment_cost_annual = 600.0;
  p.blindness_cost_annual = 3500.0;
  p.treatment_uptake = 0.70;
  p.initial.min_age = 18;
  p.initial.max_age = 79;
  p.initial.state_mix = {0.926, 0.074, 0, 0, 0, 0};
  p.screening_prevalence = 0.074;
  return p;
}

DiagnosticPerformance basic_perf() {
  DiagnosticPerformance perf;
  perf.sensitivity = 0.95;
  perf.specificity = 0.97;
  perf.expected_cost_per_case = 10.0;
  perf.human_reads_per_case = 1.0;
  return perf;
}

ScenarioSpec annual_scenario() {
  ScenarioSpec s;
  s.strategy = "test";
  s.frequency = Frequency::Annual;
  s.age_group = {20, 79};
  s.cohort_size = 100000.0;
  return s;
}

constexpr AgeGroup kNoScreening{90, 95};  // no overlap with any cohort age

}  // namespace

TEST_CASE("discount: year zero, zero rate, closed form") {
  CHECK(discount(100.0, 0, 0.03) == doctest::Approx(100.0));
  CHECK(discount(100.0, 1, 0.0) == doctest::Approx(100.0));
  CHECK(discount(103.0, 1, 0.03) == doctest::Approx(100.0));
  CHECK_THROWS_AS(discount(1.0, 1, -0.01), DomainError);
}

TEST_CASE("frozen cohort accrues utility and nothing else") {
  MarkovParameters p = basic_params();
  p.p_onset.base = 0.0;
  p.p_blind_untreated = 0.0;
  p.p_blind_treated = 0.0;
  p.p_regress = 0.0;
  p.life_table = LifeTable::flat(0.0);
  p.utility = {1.0, 0, 0, 0, 0, 0};
  p.discount_rate_cost = 0.0;
  p.discount_rate_effect = 0.0;
  p.initial.state_mix = {1, 0, 0, 0, 0, 0};
  p.initial.min_age = 40;  // nobody ages past 80 within the horizon
  p.initial.max_age = 60;

  ScenarioSpec s = annual_scenario();
  s.age_group = kNoScreening;
  s.cohort_size = 100.0;
  s.horizon_years = 10;

  CohortTrace trace = run_cohort(s, p, basic_perf());
  CHECK(trace.total_qalys() == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(trace.blindness_cases() == 0.0);
  CHECK(trace.total_cost_disc(Perspective::Societal) == 0.0);
}

TEST_CASE("a dead cohort accrues nothing") {
  MarkovParameters p = basic_params();
  p.initial.state_mix = {0, 0, 0, 0, 0, 1};
  ScenarioSpec s = annual_scenario();
  s.horizon_years = 20;
  CohortTrace trace = run_cohort(s, p, basic_perf());
  CHECK(trace.total_qalys() == 0.0);
  CHECK(trace.total_blindfree_years() == 0.0);
  CHECK(trace.total_cost_disc(Perspective::Societal) == 0.0);
  CHECK(trace.blindness_cases() == 0.0);
  CHECK(trace.detected_cases() == 0.0);
}

TEST_CASE("perfect detection treats every undetected case in one cycle") {
  MarkovParameters p = basic_params();
  p.treatment_uptake = 1.0;
  p.initial.state_mix = {0, 1, 0, 0, 0, 0};
  DiagnosticPerformance perf = basic_perf();
  perf.sensitivity = 1.0;

  ScenarioSpec s = annual_scenario();
  s.age_group = {0, 99};
  s.cohort_size = 5000.0;
  s.horizon_years = 1;

  CohortTrace trace = run_cohort(s, p, perf);
  CHECK(trace.detected_cases() == doctest::Approx(5000.0).epsilon(1e-12));
  CHECK(trace.treated_cases() == doctest::Approx(5000.0).epsilon(1e-12));
}

TEST_CASE("treated over detected equals the uptake probability") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  CohortTrace trace = run_cohort(s, p, basic_perf());
  CHECK(trace.detected_cases() > 0.0);
  CHECK(trace.treated_cases() / trace.detected_cases() ==
        doctest::Approx(0.70).epsilon(1e-12));
}

TEST_CASE("mass is conserved every cycle") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  CohortTrace trace = run_cohort(s, p, basic_perf());
  REQUIRE(trace.cycles.size() == 62);  // ages 18..79 until the youngest turns 80
  for (const auto& cyc : trace.cycles) {
    double sum = 0.0;
    for (double v : cyc.occupancy) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - s.cohort_size) <= 1e-9 * s.cohort_size);
  }
  double final_sum = 0.0;
  for (double v : trace.final_occupancy) final_sum += v;
  CHECK(std::abs(final_sum - s.cohort_size) <= 1e-9 * s.cohort_size);
}

TEST_CASE("per-cycle accruals are never negative") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  CohortTrace trace = run_cohort(s, p, basic_perf());
  for (const auto& cyc : trace.cycles) {
    CHECK(cyc.qalys_disc >= 0.0);
    CHECK(cyc.blindfree_years_disc >= 0.0);
    CHECK(cyc.screening_cost >= 0.0);
    CHECK(cyc.referral_cost >= 0.0);
    CHECK(cyc.treatment_cost >= 0.0);
    CHECK(cyc.blindness_cost >= 0.0);
    CHECK(cyc.incident_blindness >= 0.0);
    CHECK(cyc.newly_detected >= 0.0);
  }
}

TEST_CASE("deterministic: identical inputs give bit-identical traces") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  CohortTrace a = run_cohort(s, p, basic_perf());
  CohortTrace b = run_cohort(s, p, basic_perf());
  REQUIRE(a.cycles.size() == b.cycles.size());
  CHECK(std::memcmp(a.cycles.data(), b.cycles.data(),
                    a.cycles.size() * sizeof(CycleRecord)) == 0);
}

TEST_CASE("total QALYs respect the utility bound") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  CohortTrace trace = run_cohort(s, p, basic_perf());
  double max_u = 0.0;
  for (double u : p.utility) max_u = std::max(max_u, u);
  CHECK(trace.total_qalys() <=
        s.cohort_size * static_cast<double>(trace.cycles.size()) * max_u);
}

TEST_CASE("higher sensitivity never detects fewer cases") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  DiagnosticPerformance lo = basic_perf();
  lo.sensitivity = 0.80;
  DiagnosticPerformance hi = basic_perf();
  hi.sensitivity = 0.95;
  CHECK(run_cohort(s, p, hi).detected_cases() >=
        run_cohort(s, p, lo).detected_cases());
}

TEST_CASE("one-off screening screens exactly once") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  s.frequency = Frequency::OneOff;
  CohortTrace trace = run_cohort(s, p, basic_perf());
  CHECK(trace.cycles.front().screening_cost > 0.0);
  for (std::size_t t = 1; t < trace.cycles.size(); ++t)
    CHECK(trace.cycles[t].screening_cost == 0.0);
}

TEST_CASE("every-k screening hits the schedule") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  s.frequency = Frequency::Every3Years;
  CohortTrace trace = run_cohort(s, p, basic_perf());
  for (std::size_t t = 0; t < trace.cycles.size(); ++t) {
    if (t % 3 == 0)
      CHECK(trace.cycles[t].screening_cost > 0.0);
    else
      CHECK(trace.cycles[t].screening_cost == 0.0);
  }
}

TEST_CASE("an empty age-group intersection reduces to natural history") {
  MarkovParameters p = basic_params();
  ScenarioSpec a = annual_scenario();
  a.age_group = kNoScreening;
  ScenarioSpec b = annual_scenario();
  b.age_group = {0, 5};
  b.frequency = Frequency::OneOff;
  CohortTrace ta = run_cohort(a, p, basic_perf());
  CohortTrace tb = run_cohort(b, p, basic_perf());
  REQUIRE(ta.cycles.size() == tb.cycles.size());
  CHECK(std::memcmp(ta.cycles.data(), tb.cycles.data(),
                    ta.cycles.size() * sizeof(CycleRecord)) == 0);
  CHECK(ta.cycles.front().screening_cost == 0.0);
  CHECK(ta.detected_cases() == 0.0);
}

TEST_CASE("parameter errors name the offending state") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();

  SUBCASE("horizon must be positive") {
    s.horizon_years = 0;
    CHECK_THROWS_AS(run_cohort(s, p, basic_perf()), ParameterError);
  }
  SUBCASE("VTDR row sum above one") {
    p.p_blind_untreated = 0.7;
    p.p_regress = 0.4;
    CHECK_THROWS_WITH_AS(run_cohort(s, p, basic_perf()),
                         doctest::Contains("VTDR"), ParameterError);
  }
  SUBCASE("mortality composition above one") {
    p.life_table = LifeTable::flat(0.5);
    p.mortality_multiplier[static_cast<int>(HealthState::Blind)] = 3.0;
    CHECK_THROWS_WITH_AS(run_cohort(s, p, basic_perf()),
                         doctest::Contains("Blind"), ParameterError);
  }
  SUBCASE("utility ordering") {
    p.utility[static_cast<int>(HealthState::Blind)] = 0.95;
    CHECK_THROWS_AS(run_cohort(s, p, basic_perf()), ParameterError);
  }
}

TEST_CASE("aggregation is additive and perspective-aware") {
  CohortTrace trace;
  trace.cohort_size = 1.0;
  CycleRecord rec;
  rec.screening_cost_disc = 10.0;
  rec.referral_cost_disc = 5.0;
  rec.treatment_cost_disc = 20.0;
  rec.blindness_cost_disc = 65.0;
  trace.cycles.push_back(rec);

  ScenarioResult societal = aggregate_scenario(trace, Perspective::Societal);
  CHECK(societal.total_cost == doctest::Approx(100.0));
  ScenarioResult provider = aggregate_scenario(trace, Perspective::Provider);
  CHECK(provider.total_cost == doctest::Approx(35.0));

  CohortTrace empty;
  ScenarioResult zero = aggregate_scenario(empty, Perspective::Societal);
  CHECK(zero.total_cost == 0.0);
  CHECK(zero.qalys == 0.0);
}

TEST_CASE("half-cycle correction flag changes accruals but conserves mass") {
  MarkovParameters p = basic_params();
  ScenarioSpec s = annual_scenario();
  CohortTrace off = run_cohort(s, p, basic_perf());
  p.half_cycle_correction = true;
  CohortTrace on = run_cohort(s, p, basic_perf());
  CHECK(on.total_qalys() != off.total_qalys());
  for (const auto& cyc : on.cycles) {
    double sum = 0.0;
    for (double v : cyc.occupancy) sum += v;
    CHECK(std::abs(sum - s.cohort_size) <= 1e-9 * s.cohort_size);
  }
}

TEST_CASE("life table clamps outside its covered range") {
  LifeTable t(40, {0.01, 0.02, 0.03});
  CHECK(t.annual_death_prob(40) == doctest::Approx(0.01));
  CHECK(t.annual_death_prob(42) == doctest::Approx(0.03));
  CHECK(t.annual_death_prob(20) == doctest::Approx(0.01));
  CHECK(t.annual_death_prob(90) == doctest::Approx(0.03));
}

TEST_CASE("age curve applies step multipliers") {
  AgeCurve curve{0.02, {{40, 1.5}, {60, 2.0}}};
  CHECK(curve.value(30) == doctest::Approx(0.02));
  CHECK(curve.value(45) == doctest::Approx(0.03));
  CHECK(curve.value(75) == doctest::Approx(0.04));
}
