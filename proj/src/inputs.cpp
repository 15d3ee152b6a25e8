#include "drscreen/inputs.hpp"

#include <cmath>

#include "drscreen/rng.hpp"

namespace drscreen {

const char* to_string(DistFamily f) {
  switch (f) {
    case DistFamily::Beta: return "beta";
    case DistFamily::Gamma: return "gamma";
    case DistFamily::Uniform: return "uniform";
    case DistFamily::Triangular: return "triangular";
  }
  return "?";
}

void DistributionSpec::validate_hyperparameters() const {
  auto fail = [&](const std::string& why) {
    throw DomainError("distribution for '" + path + "': " + why);
  };
  switch (family) {
    case DistFamily::Beta:
      if (alpha && beta) {
        if (*alpha <= 0 || *beta <= 0) fail("alpha and beta must be positive");
      } else if (mean) {
        if (!(*mean >= 0.0 && *mean <= 1.0)) fail("mean must be within [0,1]");
        double rs = rel_sd.value_or(0.10);
        if (rs < 0) fail("rel_sd must be non-negative");
        if (rs > 0 && (*mean <= 0.0 || *mean >= 1.0))
          fail("moment matching needs mean strictly inside (0,1)");
        if (rs > 0) {
          double var = (*mean * rs) * (*mean * rs);
          if (var >= *mean * (1.0 - *mean))
            fail("variance too large for a beta with this mean");
        }
      } else {
        fail("beta needs either {alpha,beta} or {mean[,rel_sd]}");
      }
      break;
    case DistFamily::Gamma:
      if (shape && scale) {
        if (*shape <= 0 || *scale <= 0) fail("shape and scale must be positive");
      } else if (mean) {
        if (*mean < 0) fail("mean must be non-negative");
        double rs = rel_sd.value_or(0.10);
        if (rs < 0) fail("rel_sd must be non-negative");
        if (rs > 0 && *mean == 0.0) fail("moment matching needs a positive mean");
      } else {
        fail("gamma needs either {shape,scale} or {mean[,rel_sd]}");
      }
      break;
    case DistFamily::Uniform:
      if (!low || !high) fail("uniform needs {low,high}");
      if (*low > *high) fail("low must not exceed high");
      break;
    case DistFamily::Triangular:
      if (!low || !high || !mode) fail("triangular needs {low,mode,high}");
      if (!(*low <= *mode && *mode <= *high)) fail("requires low <= mode <= high");
      break;
  }
}

double DistributionSpec::sample(Rng& rng) const {
  switch (family) {
    case DistFamily::Beta: {
      if (alpha && beta) return rng.beta(*alpha, *beta);
      const double m = *mean;
      const double rs = rel_sd.value_or(0.10);
      if (rs == 0.0) return m;  // point mass
      const double var = (m * rs) * (m * rs);
      const double k = m * (1.0 - m) / var - 1.0;
      return rng.beta(m * k, (1.0 - m) * k);
    }
    case DistFamily::Gamma: {
      if (shape && scale) return rng.gamma(*shape, *scale);
      const double m = *mean;
      const double rs = rel_sd.value_or(0.10);
      if (rs == 0.0 || m == 0.0) return m;
      // mean = shape*scale, rel_sd^2 = 1/shape
      return rng.gamma(1.0 / (rs * rs), m * rs * rs);
    }
    case DistFamily::Uniform:
      if (*low == *high) return *low;
      return rng.uniform(*low, *high);
    case DistFamily::Triangular:
      return rng.triangular(*low, *mode, *high);
  }
  throw DomainError("unknown distribution family");
}

namespace {

// splits "a.b.c" into segments
std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> segs;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      segs.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  segs.push_back(cur);
  return segs;
}

constexpr ParamDomain kProb{0.0, 1.0, true, false};
constexpr ParamDomain kCost{0.0, 1e12, false, true};
constexpr ParamDomain kRate{0.0, 1.0, true, false};

}  // namespace

double* param_ref(ModelInputs& in, const std::string& path) {
  const auto segs = split_path(path);
  if (segs.size() >= 3 && segs[0] == "graders") {
    for (auto& p : in.graders.mutable_profiles()) {
      if (p.id != segs[1]) continue;
      if (segs.size() == 3) {
        if (segs[2] == "sensitivity") return &p.sensitivity;
        if (segs[2] == "specificity") return &p.specificity;
        if (segs[2] == "cost_per_read") return &p.cost_per_read;
        if (segs[2] == "ungradable_rate") return &p.ungradable_rate;
      } else if (segs.size() == 4 && segs[2] == "filter" && p.filter) {
        if (segs[3] == "p_pass_given_positive") return &p.filter->p_pass_given_positive;
        if (segs[3] == "p_pass_given_negative") return &p.filter->p_pass_given_negative;
      }
      return nullptr;
    }
    return nullptr;
  }
  if (segs.size() == 2 && segs[0] == "transitions") {
    auto& m = in.params;
    if (segs[1] == "p_onset") return &m.p_onset.base;
    if (segs[1] == "p_blind_untreated") return &m.p_blind_untreated;
    if (segs[1] == "p_blind_treated") return &m.p_blind_treated;
    if (segs[1] == "p_regress") return &m.p_regress;
    if (segs[1] == "treatment_uptake") return &m.treatment_uptake;
    return nullptr;
  }
  if (segs.size() == 2 && segs[0] == "utilities") {
    auto& u = in.params.utility;
    if (segs[1] == "NonVTDR") return &u[static_cast<int>(HealthState::NonVtdr)];
    if (segs[1] == "VTDR") return &u[static_cast<int>(HealthState::VtdrUndetected)];
    if (segs[1] == "TreatedDR") return &u[static_cast<int>(HealthState::TreatedDr)];
    if (segs[1] == "Blind") return &u[static_cast<int>(HealthState::Blind)];
    return nullptr;
  }
  if (segs.size() == 2 && segs[0] == "costs") {
    auto& m = in.params;
    if (segs[1] == "referral") return &m.referral_cost;
    if (segs[1] == "treatment_initial") return &m.treatment_cost_initial;
    if (segs[1] == "treatment_annual") return &m.treatment_cost_annual;
    if (segs[1] == "blindness_annual") return &m.blindness_cost_annual;
    return nullptr;
  }
  if (segs.size() == 2 && segs[0] == "discounting") {
    if (segs[1] == "cost_rate") return &in.params.discount_rate_cost;
    if (segs[1] == "effect_rate") return &in.params.discount_rate_effect;
    return nullptr;
  }
  if (segs.size() == 2 && segs[0] == "cohort") {
    if (segs[1] == "screening_prevalence") return &in.params.screening_prevalence;
    return nullptr;
  }
  return nullptr;
}

ParamDomain param_domain(const std::string& path) {
  const auto segs = split_path(path);
  if (segs.empty()) return {};
  if (segs[0] == "graders") {
    if (segs.back() == "cost_per_read") return kCost;
    return kProb;
  }
  if (segs[0] == "transitions" || segs[0] == "utilities" || segs[0] == "cohort")
    return kProb;
  if (segs[0] == "costs") return kCost;
  if (segs[0] == "discounting") return kRate;
  return {};
}

double get_param(const ModelInputs& inputs, const std::string& path) {
  double* p = param_ref(const_cast<ModelInputs&>(inputs), path);
  if (p == nullptr) throw DomainError("unknown parameter path '" + path + "'");
  return *p;
}

void set_param(ModelInputs& inputs, const std::string& path, double value) {
  double* p = param_ref(inputs, path);
  if (p == nullptr) throw DomainError("unknown parameter path '" + path + "'");
  const ParamDomain dom = param_domain(path);
  if (!(value >= dom.lo && value <= dom.hi))
    throw DomainError("parameter '" + path + "' value " + std::to_string(value) +
                      " outside [" + std::to_string(dom.lo) + "," +
                      std::to_string(dom.hi) + "]");
  *p = value;
}

ScenarioResult evaluate_scenario(const ModelInputs& inputs, const ScenarioSpec& spec) {
  StrategyTree tree = inputs.parse(spec.strategy);
  DiagnosticPerformance perf =
      closed_form_performance(tree, inputs.graders, inputs.params.screening_prevalence);
  CohortTrace trace = run_cohort(spec, inputs.params, perf);
  ScenarioResult result = aggregate_scenario(trace, spec.perspective);
  result.scenario_id = spec.id();
  result.strategy = spec.strategy;
  result.frequency = spec.frequency;
  result.age_group = spec.age_group;
  return result;
}

}  // namespace drscreen
