#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "drscreen/performance.hpp"
#include "drscreen/strategy.hpp"

namespace drscreen {

// VTDR is split into detected/undetected sub-states so screening and
// treatment uptake can act on it; reports aggregate the two back into a
// single VTDR figure.
enum class HealthState {
  NonVtdr = 0,
  VtdrUndetected = 1,
  VtdrDetectedUntreated = 2,
  TreatedDr = 3,
  Blind = 4,
  Dead = 5,
};
inline constexpr int kNumStates = 6;
inline constexpr int kModelEndAge = 80;  // assumed life expectancy; no accrual beyond

const char* to_string(HealthState s);

class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Annual all-cause death probability by age; clamps outside the covered range.
class LifeTable {
 public:
  LifeTable() = default;
  LifeTable(int first_age, std::vector<double> probs);
  static LifeTable from_csv(const std::string& path);
  static LifeTable flat(double q);

  double annual_death_prob(int age) const;
  bool empty() const { return probs_.empty(); }

 private:
  int first_age_ = 0;
  std::vector<double> probs_;
};

// Base annual probability optionally shaped by age (step-function multipliers
// keyed by the age a band starts at).
struct AgeCurve {
  double base = 0.0;
  std::vector<std::pair<int, double>> age_multipliers;  // sorted by age ascending

  double value(int age) const;
};

struct InitialCohort {
  int min_age = 18;
  int max_age = 79;
  std::vector<double> age_weights;  // empty = uniform; else one weight per year of age
  std::array<double, kNumStates> state_mix{};  // fractions, sum to 1
};

struct MarkovParameters {
  // natural history, annual transition probabilities
  AgeCurve p_onset;                // NonVTDR -> VTDR (undetected)
  double p_blind_untreated = 0.0;  // VTDR without treatment -> Blind
  double p_blind_treated = 0.0;    // TreatedDR -> Blind
  double p_regress = 0.0;          // VTDR without treatment -> NonVTDR

  LifeTable life_table;
  std::array<double, kNumStates> mortality_multiplier{1, 1, 1, 1, 1, 1};

  std::array<double, kNumStates> utility{};  // QALY weight per person-year; Dead = 0

  // costs, USD
  double referral_cost = 0.0;           // per referred case (true or false positive)
  double treatment_cost_initial = 0.0;  // one-off on entering treatment
  double treatment_cost_annual = 0.0;   // per person-year in TreatedDR
  double blindness_cost_annual = 0.0;   // per person-year blind (societal category)

  double treatment_uptake = 0.70;  // P(detected VTDR case receives treatment)

  double discount_rate_cost = 0.03;
  double discount_rate_effect = 0.03;

  InitialCohort initial;
  double screening_prevalence = 0.0;  // prevalence used when composing performance
  bool half_cycle_correction = false;

  void validate() const;  // throws ParameterError naming the offending field
};

enum class Frequency {
  OneOff = 0,
  Annual = 1,
  Every2Years = 2,
  Every3Years = 3,
  Every4Years = 4,
  Every5Years = 5,
};
// 0 for one-off, otherwise the interval in years.
int interval_years(Frequency f);
const char* to_string(Frequency f);
std::optional<Frequency> frequency_from_string(const std::string& name);

struct AgeGroup {
  int min_age = 20;
  int max_age = 79;
};
std::string to_string(const AgeGroup& g);
// The five target groups evaluated in the scenario grid.
const std::vector<AgeGroup>& standard_age_groups();
const std::vector<Frequency>& standard_frequencies();

enum class Perspective { Societal, Provider };
const char* to_string(Perspective p);

struct ScenarioSpec {
  std::string strategy;  // expression text, e.g. "AI\xC2\xB7M+M2"
  Frequency frequency = Frequency::Annual;
  AgeGroup age_group{20, 79};
  double cohort_size = 100000.0;
  std::optional<int> horizon_years;  // default: run until the youngest stratum turns 80
  Perspective perspective = Perspective::Societal;

  std::string id() const;  // "<strategy>|<frequency>|<age group>"
};

struct CycleRecord {
  std::array<double, kNumStates> occupancy{};  // persons at cycle start, all ages

  // undiscounted / discounted costs accrued during the cycle, by category
  double screening_cost = 0.0, referral_cost = 0.0, treatment_cost = 0.0,
         blindness_cost = 0.0;
  double screening_cost_disc = 0.0, referral_cost_disc = 0.0,
         treatment_cost_disc = 0.0, blindness_cost_disc = 0.0;

  double qalys_disc = 0.0;
  double blindfree_years_disc = 0.0;  // person-years neither blind nor dead

  // event counts (persons, undiscounted)
  double incident_blindness = 0.0;
  double newly_detected = 0.0;
  double newly_treated = 0.0;
};

struct CohortTrace {
  double cohort_size = 0.0;
  std::vector<CycleRecord> cycles;
  std::array<double, kNumStates> final_occupancy{};

  double total_qalys() const;
  double total_blindfree_years() const;
  double total_cost_disc(Perspective p) const;
  double category_cost_disc(int category) const;  // 0 screening,1 referral,2 treatment,3 blindness
  double blindness_cases() const;
  double detected_cases() const;
  double treated_cases() const;
};

// One yearly cycle applies, in order: screening (on eligible ages in screening
// years), annual state cost and utility accrual, natural-history progression,
// then death, then aging by one band. Screened pool = alive, non-blind,
// untreated individuals; previously detected untreated cases are re-screened
// at cost but generate no new referral or treatment-uptake event. Strata that
// reach age 80 stop accruing and stop transitioning.
CohortTrace run_cohort(const ScenarioSpec& scenario, const MarkovParameters& params,
                       const DiagnosticPerformance& perf);

// value / (1+rate)^year
double discount(double value, int year, double rate);

struct ScenarioResult {
  std::string scenario_id;
  std::string strategy;
  Frequency frequency = Frequency::Annual;
  AgeGroup age_group;
  Perspective perspective = Perspective::Societal;

  double total_cost = 0.0;  // discounted, perspective-filtered
  double screening_cost = 0.0, referral_cost = 0.0, treatment_cost = 0.0,
         blindness_cost = 0.0;  // discounted
  double qalys = 0.0;
  double blindfree_years = 0.0;
  double blindness_cases = 0.0, detected_cases = 0.0, treated_cases = 0.0;
};

// Provider perspective excludes the blindness cost category entirely.
ScenarioResult aggregate_scenario(const CohortTrace& trace, Perspective perspective);

}  // namespace drscreen
