#pragma once

#include <optional>

#include "drscreen/strategy.hpp"

namespace drscreen {

// Composed pipeline performance. Grader errors are assumed conditionally
// independent given true disease status; no correlation model is applied.
struct DiagnosticPerformance {
  double sensitivity = 0.0;            // P(final positive | diseased)
  double specificity = 0.0;            // P(final negative | not diseased)
  double expected_cost_per_case = 0.0; // prevalence-weighted grading cost, USD
  double human_reads_per_case = 0.0;   // expected reads per screened case
  double ai_reads_per_case = 0.0;
};

// Exact recursive composition:
//   Leaf          Se' = Se + u(1-Se), Sp' = Sp(1-u)   (u = ungradable rate)
//   Filtered      Se' = 1 - p_pass_given_positive, Sp' = p_pass_given_negative
//   Sequential    Se = Se_U Se_R,  Sp = 1 - (1-Sp_U)(1-Sp_R)
//   Consensus     Se = Se_A Se_B + [Se_A(1-Se_B) + (1-Se_A)Se_B] Se_C, Sp symmetric
// Costs accrue per grader at the probability a case reaches it.
// prevalence must lie strictly inside (0,1).
DiagnosticPerformance closed_form_performance(const StrategyTree& tree,
                                              const GraderRegistry& registry,
                                              double prevalence);

// Brute-force oracle: enumerates every joint grader-verdict combination per
// true state, routes each through the tree, and sums the weighted outcomes.
// Independent of the closed form; agrees with it to 1e-12. Accepts prevalence
// in [0,1]; refuses trees with more than 8 grader instances.
DiagnosticPerformance enumerate_performance(const StrategyTree& tree,
                                            const GraderRegistry& registry,
                                            double prevalence);

// prevalence-weighted accuracy: p·Se + (1-p)·Sp, prevalence in (0,1).
double accuracy(const DiagnosticPerformance& perf, double prevalence);

// Inverts the accuracy formula: (acc - sp) / (se - sp).
// Undefined (nullopt) when se == sp.
std::optional<double> implied_prevalence(double acc, double se, double sp);

}  // namespace drscreen
