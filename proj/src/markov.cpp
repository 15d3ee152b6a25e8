#include "drscreen/markov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace drscreen {

const char* to_string(HealthState s) {
  switch (s) {
    case HealthState::NonVtdr: return "NonVTDR";
    case HealthState::VtdrUndetected: return "VTDR_undetected";
    case HealthState::VtdrDetectedUntreated: return "VTDR_detected_untreated";
    case HealthState::TreatedDr: return "TreatedDR";
    case HealthState::Blind: return "Blind";
    case HealthState::Dead: return "Dead";
  }
  return "?";
}

LifeTable::LifeTable(int first_age, std::vector<double> probs)
    : first_age_(first_age), probs_(std::move(probs)) {
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0 && probs_[i] <= 1.0))
      throw ParameterError("life table: death probability at age " +
                           std::to_string(first_age_ + static_cast<int>(i)) +
                           " outside [0,1]");
  }
}

LifeTable LifeTable::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open life table '" + path + "'");
  std::vector<std::pair<int, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments and blanks; tolerate a header row
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int age;
    double q;
    if (!(ss >> age >> q)) {
      if (lineno == 1) continue;  // header
      throw ParameterError("life table '" + path + "': cannot parse line " +
                           std::to_string(lineno));
    }
    rows.emplace_back(age, q);
  }
  if (rows.empty()) throw ParameterError("life table '" + path + "' is empty");
  std::sort(rows.begin(), rows.end());
  std::vector<double> probs;
  int first = rows.front().first;
  int expect = first;
  for (auto& [age, q] : rows) {
    if (age != expect)
      throw ParameterError("life table '" + path + "': ages must be consecutive (missing " +
                           std::to_string(expect) + ")");
    probs.push_back(q);
    ++expect;
  }
  return LifeTable(first, std::move(probs));
}

LifeTable LifeTable::flat(double q) { return LifeTable(0, std::vector<double>{q}); }

double LifeTable::annual_death_prob(int age) const {
  if (probs_.empty()) throw ParameterError("life table not loaded");
  int idx = age - first_age_;
  idx = std::clamp(idx, 0, static_cast<int>(probs_.size()) - 1);
  return probs_[static_cast<std::size_t>(idx)];
}

double AgeCurve::value(int age) const {
  double mult = 1.0;
  for (const auto& [from_age, m] : age_multipliers) {
    if (age >= from_age) mult = m;
  }
  return base * mult;
}

void MarkovParameters::validate() const {
  auto check_prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ParameterError(std::string(name) + " must be within [0,1]");
  };
  check_prob(p_onset.base, "transitions.p_onset");
  check_prob(p_blind_untreated, "transitions.p_blind_untreated");
  check_prob(p_blind_treated, "transitions.p_blind_treated");
  check_prob(p_regress, "transitions.p_regress");
  check_prob(treatment_uptake, "transitions.treatment_uptake");
  if (p_blind_untreated + p_regress > 1.0)
    throw ParameterError(
        "outgoing probabilities for state VTDR exceed 1 "
        "(p_blind_untreated + p_regress)");
  for (int s = 0; s < kNumStates; ++s) {
    if (!(utility[s] >= 0.0 && utility[s] <= 1.0))
      throw ParameterError(std::string("utilities.") + to_string(HealthState(s)) +
                           " must be within [0,1]");
    if (mortality_multiplier[s] < 0.0)
      throw ParameterError(std::string("mortality multiplier for ") +
                           to_string(HealthState(s)) + " must be non-negative");
  }
  if (utility[static_cast<int>(HealthState::Dead)] != 0.0)
    throw ParameterError("utilities.Dead must be 0");
  const double u_blind = utility[static_cast<int>(HealthState::Blind)];
  const double u_treated = utility[static_cast<int>(HealthState::TreatedDr)];
  const double u_non = utility[static_cast<int>(HealthState::NonVtdr)];
  if (!(u_blind <= u_treated && u_treated <= u_non))
    throw ParameterError("utilities must satisfy Blind <= TreatedDR <= NonVTDR");
  if (referral_cost < 0 || treatment_cost_initial < 0 || treatment_cost_annual < 0 ||
      blindness_cost_annual < 0)
    throw ParameterError("costs must be non-negative");
  if (discount_rate_cost < 0 || discount_rate_effect < 0)
    throw ParameterError("discount rates must be non-negative");
  if (initial.min_age > initial.max_age || initial.min_age < 0 ||
      initial.max_age >= kModelEndAge)
    throw ParameterError("cohort age range must satisfy 0 <= min_age <= max_age < 80");
  if (!initial.age_weights.empty() &&
      initial.age_weights.size() !=
          static_cast<std::size_t>(initial.max_age - initial.min_age + 1))
    throw ParameterError("cohort.age_weights must have one entry per year of age");
  double mix = std::accumulate(initial.state_mix.begin(), initial.state_mix.end(), 0.0);
  if (std::abs(mix - 1.0) > 1e-9)
    throw ParameterError("cohort initial state mix must sum to 1");
  for (double f : initial.state_mix)
    if (f < 0.0) throw ParameterError("cohort initial state mix entries must be >= 0");
  if (!(screening_prevalence > 0.0 && screening_prevalence < 1.0))
    throw ParameterError("cohort.screening_prevalence must lie strictly inside (0,1)");
  if (life_table.empty()) throw ParameterError("life table not loaded");
}

int interval_years(Frequency f) {
  switch (f) {
    case Frequency::OneOff: return 0;
    case Frequency::Annual: return 1;
    case Frequency::Every2Years: return 2;
    case Frequency::Every3Years: return 3;
    case Frequency::Every4Years: return 4;
    case Frequency::Every5Years: return 5;
  }
  return 0;
}

const char* to_string(Frequency f) {
  switch (f) {
    case Frequency::OneOff: return "one-off";
    case Frequency::Annual: return "annual";
    case Frequency::Every2Years: return "every-2-years";
    case Frequency::Every3Years: return "every-3-years";
    case Frequency::Every4Years: return "every-4-years";
    case Frequency::Every5Years: return "every-5-years";
  }
  return "?";
}

std::optional<Frequency> frequency_from_string(const std::string& name) {
  for (Frequency f : standard_frequencies())
    if (name == to_string(f)) return f;
  return std::nullopt;
}

std::string to_string(const AgeGroup& g) {
  return std::to_string(g.min_age) + "-" + std::to_string(g.max_age);
}

const std::vector<AgeGroup>& standard_age_groups() {
  static const std::vector<AgeGroup> groups = {
      {20, 79}, {30, 79}, {40, 79}, {50, 79}, {60, 79}};
  return groups;
}

const std::vector<Frequency>& standard_frequencies() {
  static const std::vector<Frequency> freqs = {
      Frequency::OneOff,      Frequency::Annual,      Frequency::Every2Years,
      Frequency::Every3Years, Frequency::Every4Years, Frequency::Every5Years};
  return freqs;
}

const char* to_string(Perspective p) {
  return p == Perspective::Societal ? "societal" : "provider";
}

std::string ScenarioSpec::id() const {
  return strategy + "|" + to_string(frequency) + "|" + to_string(age_group);
}

double discount(double value, int year, double rate) {
  if (rate < 0.0) throw DomainError("discount rate must be non-negative");
  return value / std::pow(1.0 + rate, year);
}

namespace {

constexpr int S_NON = static_cast<int>(HealthState::NonVtdr);
constexpr int S_VU = static_cast<int>(HealthState::VtdrUndetected);
constexpr int S_VD = static_cast<int>(HealthState::VtdrDetectedUntreated);
constexpr int S_TR = static_cast<int>(HealthState::TreatedDr);
constexpr int S_BL = static_cast<int>(HealthState::Blind);
constexpr int S_DE = static_cast<int>(HealthState::Dead);

bool is_screening_year(Frequency f, int cycle) {
  int k = interval_years(f);
  if (k == 0) return cycle == 0;
  return cycle % k == 0;
}

// death probabilities composed with state multipliers must stay within [0,1]
void validate_mortality(const MarkovParameters& p, int min_age) {
  for (int age = min_age; age < kModelEndAge; ++age) {
    double q = p.life_table.annual_death_prob(age);
    for (int s = 0; s < S_DE; ++s) {
      double composed = q * p.mortality_multiplier[s];
      if (composed > 1.0)
        throw ParameterError("death probability for state " +
                             std::string(to_string(HealthState(s))) + " at age " +
                             std::to_string(age) + " exceeds 1 after composition");
    }
    if (p.p_onset.value(age) > 1.0)
      throw ParameterError("transitions.p_onset at age " + std::to_string(age) +
                           " exceeds 1");
  }
}

}  // namespace

CohortTrace run_cohort(const ScenarioSpec& scenario, const MarkovParameters& params,
                       const DiagnosticPerformance& perf) {
  params.validate();
  if (scenario.horizon_years && *scenario.horizon_years <= 0)
    throw ParameterError("scenario horizon must be positive");
  if (scenario.cohort_size <= 0.0)
    throw ParameterError("cohort size must be positive");

  const InitialCohort& init = params.initial;
  const int horizon = scenario.horizon_years ? *scenario.horizon_years
                                             : kModelEndAge - init.min_age;
  validate_mortality(params, init.min_age);

  // occ[band][state]; band b holds people aged min_age + b; the final band
  // (age 80) is a frozen bucket that neither accrues nor transitions.
  const int n_bands = kModelEndAge - init.min_age + 1;
  const int frozen = n_bands - 1;
  std::vector<std::array<double, kNumStates>> occ(
      n_bands, std::array<double, kNumStates>{});

  {
    const int n_ages = init.max_age - init.min_age + 1;
    double wsum = 0.0;
    for (int a = 0; a < n_ages; ++a)
      wsum += init.age_weights.empty() ? 1.0 : init.age_weights[a];
    for (int a = 0; a < n_ages; ++a) {
      double w = (init.age_weights.empty() ? 1.0 : init.age_weights[a]) / wsum;
      for (int s = 0; s < kNumStates; ++s)
        occ[a][s] = scenario.cohort_size * w * init.state_mix[s];
    }
  }

  CohortTrace trace;
  trace.cohort_size = scenario.cohort_size;
  trace.cycles.reserve(static_cast<std::size_t>(horizon));

  for (int t = 0; t < horizon; ++t) {
    CycleRecord rec;
    for (const auto& band : occ)
      for (int s = 0; s < kNumStates; ++s) rec.occupancy[s] += band[s];

    const double df_cost = 1.0 / std::pow(1.0 + params.discount_rate_cost, t);
    const double df_eff = 1.0 / std::pow(1.0 + params.discount_rate_effect, t);
    const int age_of = init.min_age;  // band b is aged age_of + b this cycle

    // -- screening --
    if (is_screening_year(scenario.frequency, t)) {
      for (int b = 0; b < frozen; ++b) {
        const int age = age_of + b;
        if (age < scenario.age_group.min_age || age > scenario.age_group.max_age)
          continue;
        auto& band = occ[b];
        const double pool = band[S_NON] + band[S_VU] + band[S_VD];
        if (pool <= 0.0) continue;
        rec.screening_cost += pool * perf.expected_cost_per_case;

        const double false_pos = band[S_NON] * (1.0 - perf.specificity);
        rec.referral_cost += false_pos * params.referral_cost;

        const double newly = band[S_VU] * perf.sensitivity;
        rec.referral_cost += newly * params.referral_cost;
        const double to_treat = newly * params.treatment_uptake;
        rec.treatment_cost += to_treat * params.treatment_cost_initial;

        band[S_VU] -= newly;
        band[S_VD] += newly - to_treat;
        band[S_TR] += to_treat;
        rec.newly_detected += newly;
        rec.newly_treated += to_treat;
      }
    }

    // -- annual state costs and utilities (post-screening occupancy) --
    double qalys_a = 0.0, blindfree_a = 0.0, treat_annual_a = 0.0, blind_annual_a = 0.0;
    for (int b = 0; b < frozen; ++b) {
      const auto& band = occ[b];
      treat_annual_a += band[S_TR];
      blind_annual_a += band[S_BL];
      for (int s = 0; s < kNumStates; ++s) qalys_a += band[s] * params.utility[s];
      blindfree_a += band[S_NON] + band[S_VU] + band[S_VD] + band[S_TR];
    }

    // -- natural history: progress, then die --
    for (int b = 0; b < frozen; ++b) {
      const int age = age_of + b;
      auto& band = occ[b];

      const double onset = band[S_NON] * params.p_onset.value(age);
      const double blind_u = band[S_VU] * params.p_blind_untreated;
      const double regress_u = band[S_VU] * params.p_regress;
      const double blind_d = band[S_VD] * params.p_blind_untreated;
      const double regress_d = band[S_VD] * params.p_regress;
      const double blind_t = band[S_TR] * params.p_blind_treated;

      band[S_NON] += regress_u + regress_d - onset;
      band[S_VU] += onset - blind_u - regress_u;
      band[S_VD] -= blind_d + regress_d;
      band[S_TR] -= blind_t;
      band[S_BL] += blind_u + blind_d + blind_t;
      rec.incident_blindness += blind_u + blind_d + blind_t;

      const double q = params.life_table.annual_death_prob(age);
      for (int s = 0; s < S_DE; ++s) {
        const double dead = band[s] * std::min(1.0, q * params.mortality_multiplier[s]);
        band[s] -= dead;
        band[S_DE] += dead;
      }
    }

    if (params.half_cycle_correction) {
      // average the within-cycle and end-of-cycle occupancy for accruals
      double qalys_b = 0.0, blindfree_b = 0.0, treat_b = 0.0, blind_b = 0.0;
      for (int b = 0; b < frozen; ++b) {
        const auto& band = occ[b];
        treat_b += band[S_TR];
        blind_b += band[S_BL];
        for (int s = 0; s < kNumStates; ++s) qalys_b += band[s] * params.utility[s];
        blindfree_b += band[S_NON] + band[S_VU] + band[S_VD] + band[S_TR];
      }
      qalys_a = 0.5 * (qalys_a + qalys_b);
      blindfree_a = 0.5 * (blindfree_a + blindfree_b);
      treat_annual_a = 0.5 * (treat_annual_a + treat_b);
      blind_annual_a = 0.5 * (blind_annual_a + blind_b);
    }

    rec.treatment_cost += treat_annual_a * params.treatment_cost_annual;
    rec.blindness_cost += blind_annual_a * params.blindness_cost_annual;
    rec.qalys_disc = qalys_a * df_eff;
    rec.blindfree_years_disc = blindfree_a * df_eff;

    rec.screening_cost_disc = rec.screening_cost * df_cost;
    rec.referral_cost_disc = rec.referral_cost * df_cost;
    rec.treatment_cost_disc = rec.treatment_cost * df_cost;
    rec.blindness_cost_disc = rec.blindness_cost * df_cost;

    // -- aging: everyone moves up one band; the last band absorbs --
    for (int s = 0; s < kNumStates; ++s) occ[frozen][s] += occ[frozen - 1][s];
    for (int b = frozen - 1; b > 0; --b) occ[b] = occ[b - 1];
    occ[0] = std::array<double, kNumStates>{};

    trace.cycles.push_back(rec);
  }

  for (const auto& band : occ)
    for (int s = 0; s < kNumStates; ++s) trace.final_occupancy[s] += band[s];
  return trace;
}

double CohortTrace::total_qalys() const {
  double v = 0.0;
  for (const auto& c : cycles) v += c.qalys_disc;
  return v;
}

double CohortTrace::total_blindfree_years() const {
  double v = 0.0;
  for (const auto& c : cycles) v += c.blindfree_years_disc;
  return v;
}

double CohortTrace::category_cost_disc(int category) const {
  double v = 0.0;
  for (const auto& c : cycles) {
    switch (category) {
      case 0: v += c.screening_cost_disc; break;
      case 1: v += c.referral_cost_disc; break;
      case 2: v += c.treatment_cost_disc; break;
      case 3: v += c.blindness_cost_disc; break;
      default: throw DomainError("unknown cost category");
    }
  }
  return v;
}

double CohortTrace::total_cost_disc(Perspective p) const {
  double v = category_cost_disc(0) + category_cost_disc(1) + category_cost_disc(2);
  if (p == Perspective::Societal) v += category_cost_disc(3);
  return v;
}

double CohortTrace::blindness_cases() const {
  double v = 0.0;
  for (const auto& c : cycles) v += c.incident_blindness;
  return v;
}

double CohortTrace::detected_cases() const {
  double v = 0.0;
  for (const auto& c : cycles) v += c.newly_detected;
  return v;
}

double CohortTrace::treated_cases() const {
  double v = 0.0;
  for (const auto& c : cycles) v += c.newly_treated;
  return v;
}

ScenarioResult aggregate_scenario(const CohortTrace& trace, Perspective perspective) {
  ScenarioResult r;
  r.perspective = perspective;
  r.screening_cost = trace.category_cost_disc(0);
  r.referral_cost = trace.category_cost_disc(1);
  r.treatment_cost = trace.category_cost_disc(2);
  r.blindness_cost = trace.category_cost_disc(3);
  r.total_cost = r.screening_cost + r.referral_cost + r.treatment_cost;
  if (perspective == Perspective::Societal) r.total_cost += r.blindness_cost;
  r.qalys = trace.total_qalys();
  r.blindfree_years = trace.total_blindfree_years();
  r.blindness_cases = trace.blindness_cases();
  r.detected_cases = trace.detected_cases();
  r.treated_cases = trace.treated_cases();
  return r;
}

}  // namespace drscreen
