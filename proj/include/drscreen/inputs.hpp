#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drscreen/cea.hpp"
#include "drscreen/markov.hpp"
#include "drscreen/strategy.hpp"

namespace drscreen {

enum class DistFamily { Beta, Gamma, Uniform, Triangular };
const char* to_string(DistFamily f);

class Rng;

// One varied parameter for probabilistic sensitivity analysis. Either explicit
// hyperparameters or (mean, rel_sd) moment matching; rel_sd 0 degenerates to a
// point mass at the mean.
struct DistributionSpec {
  std::string path;  // dot-notation, e.g. "graders.M2.sensitivity"
  DistFamily family = DistFamily::Beta;

  // beta
  std::optional<double> alpha, beta;
  // gamma
  std::optional<double> shape, scale;
  // uniform / triangular
  std::optional<double> low, high, mode;
  // moment matching
  std::optional<double> mean, rel_sd;

  std::string correlation_group;  // reserved; unused by default

  double sample(Rng& rng) const;
  void validate_hyperparameters() const;  // throws DomainError naming the path
};

// Everything a run needs: grader profiles, model parameters, the strategy
// set, the comparator, the WTP policy and the PSA configuration.
struct ModelInputs {
  GraderRegistry graders;
  MarkovParameters params;
  WtpPolicy wtp;
  std::vector<std::string> strategies;  // expression texts
  std::string status_quo;               // comparator expression
  std::vector<DistributionSpec> psa_distributions;
  int psa_draws = 10000;
  double cohort_size = 100000.0;
  std::string config_hash;  // provenance digest of the loaded configuration

  StrategyTree parse(const std::string& expr) const {
    return parse_strategy(expr, graders);
  }
};

struct ParamDomain {
  double lo = 0.0;
  double hi = 0.0;
  bool is_probability = false;
  bool is_cost = false;
};

// nullptr when the path does not name a scalar model parameter.
double* param_ref(ModelInputs& inputs, const std::string& path);
ParamDomain param_domain(const std::string& path);

double get_param(const ModelInputs& inputs, const std::string& path);
// Validates the value against the parameter's domain.
void set_param(ModelInputs& inputs, const std::string& path, double value);

// Composes the strategy's diagnostic performance at the configured screening
// prevalence, runs the cohort and aggregates under the scenario perspective.
ScenarioResult evaluate_scenario(const ModelInputs& inputs, const ScenarioSpec& spec);

}  // namespace drscreen
