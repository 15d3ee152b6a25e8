#include "drscreen/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace drscreen {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
  return j;
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number())
    throw ConfigError("config key '" + path + "' must be a number");
  return j.get<double>();
}

double number_at(const json& obj, const std::string& key, const std::string& section) {
  if (!obj.contains(key))
    throw ConfigError("missing required config key '" + section + "." + key + "'");
  return require_number(obj.at(key), section + "." + key);
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& section) {
  if (!obj.contains(key)) return fallback;
  return require_number(obj.at(key), section + "." + key);
}

void check_prob(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ConfigError("config key '" + path + "' must be within [0,1], got " +
                      std::to_string(v));
}

GraderRegistry load_graders(const json& root) {
  if (!root.contains("graders") || !root.at("graders").is_object() ||
      root.at("graders").empty())
    throw ConfigError("config section 'graders' must be a non-empty object");
  GraderRegistry registry;
  for (const auto& [id, spec] : root.at("graders").items()) {
    const std::string where = "graders." + id;
    if (!spec.is_object()) throw ConfigError("'" + where + "' must be an object");
    GraderProfile p;
    p.id = id;
    std::string kind = spec.value("kind", "human");
    if (kind == "ai")
      p.kind = GraderKind::Ai;
    else if (kind == "human")
      p.kind = GraderKind::Human;
    else
      throw ConfigError("'" + where + ".kind' must be \"human\" or \"ai\"");
    p.sensitivity = number_at(spec, "sensitivity", where);
    p.specificity = number_at(spec, "specificity", where);
    p.cost_per_read = number_at(spec, "cost_per_read", where);
    p.ungradable_rate = number_or(spec, "ungradable_rate", 0.0, where);
    if (spec.contains("filter")) {
      const json& f = spec.at("filter");
      FilterParams fp;
      fp.p_pass_given_positive = number_at(f, "p_pass_given_positive", where + ".filter");
      fp.p_pass_given_negative = number_at(f, "p_pass_given_negative", where + ".filter");
      p.filter = fp;
    }
    check_prob(p.sensitivity, where + ".sensitivity");
    check_prob(p.specificity, where + ".specificity");
    try {
      registry.add(std::move(p));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("graders: ") + e.what());
    }
  }
  return registry;
}

int state_index(const std::string& name) {
  if (name == "NonVTDR") return static_cast<int>(HealthState::NonVtdr);
  if (name == "VTDR") return -2;  // shorthand for both VTDR sub-states
  if (name == "VTDR_undetected") return static_cast<int>(HealthState::VtdrUndetected);
  if (name == "VTDR_detected_untreated")
    return static_cast<int>(HealthState::VtdrDetectedUntreated);
  if (name == "TreatedDR") return static_cast<int>(HealthState::TreatedDr);
  if (name == "Blind") return static_cast<int>(HealthState::Blind);
  if (name == "Dead") return static_cast<int>(HealthState::Dead);
  return -1;
}

MarkovParameters load_params(const json& root, const std::string& base_dir) {
  MarkovParameters m;

  for (const char* section : {"transitions", "utilities", "costs", "discounting", "cohort"})
    if (!root.contains(section) || !root.at(section).is_object())
      throw ConfigError(std::string("config section '") + section +
                        "' must be an object");

  const json& tr = root.at("transitions");
  if (tr.contains("p_onset") && tr.at("p_onset").is_object()) {
    const json& po = tr.at("p_onset");
    m.p_onset.base = number_at(po, "base", "transitions.p_onset");
    if (po.contains("age_multipliers")) {
      for (const auto& pair : po.at("age_multipliers")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError(
              "transitions.p_onset.age_multipliers entries must be [age, multiplier]");
        m.p_onset.age_multipliers.emplace_back(pair[0].get<int>(), pair[1].get<double>());
      }
      std::sort(m.p_onset.age_multipliers.begin(), m.p_onset.age_multipliers.end());
    }
  } else {
    m.p_onset.base = number_at(tr, "p_onset", "transitions");
  }
  m.p_blind_untreated = number_at(tr, "p_blind_untreated", "transitions");
  m.p_blind_treated = number_at(tr, "p_blind_treated", "transitions");
  m.p_regress = number_or(tr, "p_regress", 0.0, "transitions");
  m.treatment_uptake = number_or(tr, "treatment_uptake", 0.70, "transitions");
  if (tr.contains("mortality_multipliers")) {
    for (const auto& [name, mult] : tr.at("mortality_multipliers").items()) {
      int idx = state_index(name);
      double v = require_number(mult, "transitions.mortality_multipliers." + name);
      if (idx == -2) {
        m.mortality_multiplier[static_cast<int>(HealthState::VtdrUndetected)] = v;
        m.mortality_multiplier[static_cast<int>(HealthState::VtdrDetectedUntreated)] = v;
      } else if (idx >= 0 && idx != static_cast<int>(HealthState::Dead)) {
        m.mortality_multiplier[idx] = v;
      } else {
        throw ConfigError("unknown state '" + name +
                          "' in transitions.mortality_multipliers");
      }
    }
  }

  const json& ut = root.at("utilities");
  for (const auto& [name, val] : ut.items()) {
    int idx = state_index(name);
    double v = require_number(val, "utilities." + name);
    check_prob(v, "utilities." + name);
    if (idx == -2) {
      m.utility[static_cast<int>(HealthState::VtdrUndetected)] = v;
      m.utility[static_cast<int>(HealthState::VtdrDetectedUntreated)] = v;
    } else if (idx >= 0) {
      m.utility[idx] = v;
    } else {
      throw ConfigError("unknown state '" + name + "' in utilities");
    }
  }

  const json& co = root.at("costs");
  m.referral_cost = number_at(co, "referral", "costs");
  m.treatment_cost_initial = number_or(co, "treatment_initial", 0.0, "costs");
  m.treatment_cost_annual = number_or(co, "treatment_annual", 0.0, "costs");
  m.blindness_cost_annual = number_at(co, "blindness_annual", "costs");

  const json& di = root.at("discounting");
  m.discount_rate_cost = number_or(di, "cost_rate", 0.03, "discounting");
  m.discount_rate_effect = number_or(di, "effect_rate", 0.03, "discounting");

  const json& ch = root.at("cohort");
  m.initial.min_age = static_cast<int>(number_or(ch, "min_age", 18, "cohort"));
  m.initial.max_age = static_cast<int>(number_or(ch, "max_age", 79, "cohort"));
  if (ch.contains("age_weights"))
    for (const auto& w : ch.at("age_weights"))
      m.initial.age_weights.push_back(w.get<double>());
  m.screening_prevalence = number_at(ch, "screening_prevalence", "cohort");

  m.initial.state_mix.fill(0.0);
  double assigned = 0.0;
  if (ch.contains("initial_state_mix")) {
    for (const auto& [name, frac] : ch.at("initial_state_mix").items()) {
      int idx = state_index(name);
      if (idx == -2) idx = static_cast<int>(HealthState::VtdrUndetected);
      if (idx < 0)
        throw ConfigError("unknown state '" + name + "' in cohort.initial_state_mix");
      double v = require_number(frac, "cohort.initial_state_mix." + name);
      check_prob(v, "cohort.initial_state_mix." + name);
      m.initial.state_mix[idx] = v;
      assigned += v;
    }
  }
  if (assigned > 1.0 + 1e-9)
    throw ConfigError("cohort.initial_state_mix fractions exceed 1");
  // remainder starts disease-free
  m.initial.state_mix[static_cast<int>(HealthState::NonVtdr)] +=
      std::max(0.0, 1.0 - assigned);

  if (!ch.contains("life_table"))
    throw ConfigError("missing required config key 'cohort.life_table'");
  std::filesystem::path lt(ch.at("life_table").get<std::string>());
  if (lt.is_relative()) lt = std::filesystem::path(base_dir) / lt;
  try {
    m.life_table = LifeTable::from_csv(lt.string());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("cohort.life_table: ") + e.what());
  }

  m.half_cycle_correction = root.value("half_cycle_correction", false);
  return m;
}

DistFamily family_from_string(const std::string& s, const std::string& where) {
  if (s == "beta") return DistFamily::Beta;
  if (s == "gamma") return DistFamily::Gamma;
  if (s == "uniform") return DistFamily::Uniform;
  if (s == "triangular") return DistFamily::Triangular;
  throw ConfigError("'" + where + "': unknown distribution family '" + s + "'");
}

std::vector<DistributionSpec> load_distributions(const json& root, ModelInputs& inputs) {
  std::vector<DistributionSpec> specs;
  if (!root.contains("psa")) return specs;
  const json& psa = root.at("psa");
  inputs.psa_draws = static_cast<int>(number_or(psa, "n_draws", 10000, "psa"));
  if (inputs.psa_draws < 1) throw ConfigError("psa.n_draws must be >= 1");
  if (!psa.contains("distributions")) return specs;
  int k = 0;
  for (const auto& d : psa.at("distributions")) {
    const std::string where = "psa.distributions[" + std::to_string(k++) + "]";
    DistributionSpec spec;
    if (!d.contains("path")) throw ConfigError("'" + where + "' needs a 'path'");
    spec.path = d.at("path").get<std::string>();
    if (!d.contains("family")) throw ConfigError("'" + where + "' needs a 'family'");
    spec.family = family_from_string(d.at("family").get<std::string>(), where);
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!d.contains(key)) return std::nullopt;
      return require_number(d.at(key), where + "." + key);
    };
    spec.alpha = opt("alpha");
    spec.beta = opt("beta");
    spec.shape = opt("shape");
    spec.scale = opt("scale");
    spec.low = opt("low");
    spec.high = opt("high");
    spec.mode = opt("mode");
    spec.mean = opt("mean");
    spec.rel_sd = opt("rel_sd");
    spec.correlation_group = d.value("correlation_group", "");

    try {
      spec.validate_hyperparameters();
      get_param(inputs, spec.path);
      const ParamDomain dom = param_domain(spec.path);
      if (spec.family == DistFamily::Beta && !dom.is_probability)
        throw DomainError("beta is reserved for probability-like parameters");
      if (spec.family == DistFamily::Gamma && !dom.is_cost)
        throw DomainError("gamma is reserved for non-negative cost parameters");
    } catch (const DomainError& e) {
      throw ConfigError("'" + where + "' (" + spec.path + "): " + e.what());
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ModelInputs load_config(const std::string& path) {
  return load_config(std::vector<std::string>{path});
}

ModelInputs load_config(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("no config file given");
  json merged = read_json(paths.front());
  for (std::size_t i = 1; i < paths.size(); ++i)
    merged.merge_patch(read_json(paths[i]));
  const std::string base_dir =
      std::filesystem::path(paths.front()).parent_path().string();

  ModelInputs inputs;
  inputs.graders = load_graders(merged);
  inputs.params = load_params(merged, base_dir);

  if (!merged.contains("strategies") || !merged.at("strategies").is_array() ||
      merged.at("strategies").empty())
    throw ConfigError("config section 'strategies' must be a non-empty array");
  for (const auto& s : merged.at("strategies"))
    inputs.strategies.push_back(s.get<std::string>());
  inputs.status_quo = merged.value("status_quo", inputs.strategies.back());

  // every strategy (and the comparator) must parse against the registry
  for (const auto& expr : inputs.strategies) {
    try {
      StrategyTree tree = parse_strategy(expr, inputs.graders);
      (void)tree;
    } catch (const ParseError& e) {
      throw ConfigError("strategies: " + std::string(e.what()));
    }
  }
  if (std::find(inputs.strategies.begin(), inputs.strategies.end(), inputs.status_quo) ==
      inputs.strategies.end())
    throw ConfigError("status_quo '" + inputs.status_quo +
                      "' is not in the strategies list");

  if (merged.contains("wtp"))
    inputs.wtp.gdp_per_capita =
        number_or(merged.at("wtp"), "gdp_per_capita", 12684.0, "wtp");
  if (inputs.wtp.gdp_per_capita <= 0.0)
    throw ConfigError("wtp.gdp_per_capita must be positive");

  inputs.psa_distributions = load_distributions(merged, inputs);

  inputs.cohort_size = number_or(merged.at("cohort"), "size", 100000.0, "cohort");
  if (inputs.cohort_size <= 0.0) throw ConfigError("cohort.size must be positive");

  try {
    inputs.params.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }

  // digest of the canonicalized config plus the life table contents
  std::string canonical = merged.dump();
  {
    std::filesystem::path lt(merged.at("cohort").at("life_table").get<std::string>());
    if (lt.is_relative()) lt = std::filesystem::path(base_dir) / lt;
    std::ifstream in(lt);
    std::stringstream ss;
    ss << in.rdbuf();
    canonical += "\n";
    canonical += ss.str();
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  inputs.config_hash = buf;
  return inputs;
}

TornadoConfig load_tornado_config(const std::vector<std::string>& paths,
                                  const ModelInputs& inputs) {
  json merged = read_json(paths.front());
  for (std::size_t i = 1; i < paths.size(); ++i)
    merged.merge_patch(read_json(paths[i]));

  TornadoConfig cfg;
  if (merged.contains("tornado") && merged.at("tornado").contains("ranges")) {
    for (const auto& [path, range] : merged.at("tornado").at("ranges").items()) {
      if (!range.is_array() || range.size() != 2)
        throw ConfigError("tornado.ranges." + path + " must be [low, high]");
      cfg.ranges.emplace_back(path, std::make_pair(range[0].get<double>(),
                                                   range[1].get<double>()));
    }
    return cfg;
  }
  // fallback: ±10% around the base value of every PSA-varied parameter
  for (const auto& spec : inputs.psa_distributions) {
    double base = get_param(inputs, spec.path);
    ParamDomain dom = param_domain(spec.path);
    double lo = std::max(dom.lo, base * 0.9);
    double hi = std::min(dom.hi, base * 1.1);
    cfg.ranges.emplace_back(spec.path, std::make_pair(lo, hi));
  }
  return cfg;
}

}  // namespace drscreen
