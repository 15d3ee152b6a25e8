#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drscreen/markov.hpp"

namespace drscreen {

enum class IcerKind { Ratio, Dominated, Dominant, Undefined };

// Quadrant-aware ICER outcome. A ratio from the southwest quadrant (cost
// saved per QALY forgone) classifies differently from a northeast one, so the
// effect-delta sign travels with the value.
struct IcerResult {
  IcerKind kind = IcerKind::Undefined;
  double value = 0.0;        // defined when kind == Ratio
  bool effect_gained = true;  // ratio quadrant: true = NE (effect gained)

  bool is_ratio() const { return kind == IcerKind::Ratio; }
};

std::string to_string(const IcerResult& r);

// Mapping (per the incremental convention):
//   delta_effect == 0            -> Undefined
//   delta_cost < 0, effect > 0   -> Dominant
//   delta_cost > 0, effect < 0   -> Dominated
//   otherwise                    -> Ratio delta_cost / delta_effect
IcerResult icer(double delta_cost, double delta_qalys);
IcerResult cost_per_blindness_year_averted(double delta_cost,
                                           double delta_blindfree_years);

// Net monetary benefit: wtp * delta_qalys - delta_cost.
double nmb(double delta_cost, double delta_qalys, double wtp);

// The WTP at which two comparisons' NMB lines cross:
// (dc1 - dc2) / (dq1 - dq2). Undefined when dq1 == dq2.
std::optional<double> nmb_crossing_wtp(double dc1, double dq1, double dc2, double dq2);

struct WtpPolicy {
  double gdp_per_capita = 12684.0;  // 2023 per-capita GDP, USD

  double wtp_1x() const { return gdp_per_capita; }
  double wtp_3x() const { return 3.0 * gdp_per_capita; }
};

enum class CeClass {
  VeryCostEffective,
  CostEffective,
  NotCostEffective,
  Dominated,
  Dominant,
  Undefined,
};
const char* to_string(CeClass c);

// ICER buckets: <1x GDP very cost-effective, 1-3x cost-effective, >3x not.
// Southwest-quadrant ratios mirror through NMB: savings per QALY forgone must
// exceed the threshold for the trade to be worthwhile (> 3x GDP very, > 1x
// cost-effective, otherwise not).
CeClass classify(const IcerResult& r, const WtpPolicy& policy);

struct CeaRecord {
  std::string scenario_id;
  std::string comparator_id;
  double delta_cost = 0.0;
  double delta_qalys = 0.0;
  double delta_blindfree_years = 0.0;
  IcerResult icer;
  IcerResult cost_per_blindness_year;
  double nmb_1x = 0.0;
  double nmb_3x = 0.0;
  CeClass ce_class = CeClass::Undefined;
};

CeaRecord make_cea_record(const ScenarioResult& scenario,
                          const ScenarioResult& comparator, const WtpPolicy& policy);

// -- cost-effectiveness frontier --

struct FrontierPoint {
  std::string id;
  double cost = 0.0;
  double qalys = 0.0;
};

enum class DominanceLabel { OnFrontier, StrictlyDominated, ExtendedlyDominated, Duplicate };
const char* to_string(DominanceLabel d);

struct FrontierMember {
  std::string id;
  double cost = 0.0;
  double qalys = 0.0;
  std::optional<double> icer_from_prev;  // pairwise ICER to the previous member
};

struct FrontierResult {
  std::vector<FrontierMember> frontier;  // cost-ascending
  std::vector<std::pair<std::string, DominanceLabel>> labels;  // input order
};

// Sorts by cost, removes strictly dominated points, then (optionally)
// extendedly dominated ones until adjacent ICERs increase strictly.
// Duplicate (cost, qalys) points are kept once, first scenario id wins.
FrontierResult frontier(std::vector<FrontierPoint> points,
                        bool extended_dominance = true);

}  // namespace drscreen
